//! Classifying model responses against answer snapshots.
//!
//! A response is *correct* when it names a current answer, *outdated* when it
//! names only an answer that has ended, and *irrelevant* otherwise. Response
//! records that carry an adapter error are judged irrelevant and flagged with
//! `from_error`.

mod matcher;
mod normalize;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adapters::{ResponseRecord, ResponseSet};
use crate::error::{Error, Result};
use crate::io;
use crate::wikidata::{AnswerSnapshot, ValidityInterval};

pub use matcher::{MatchKind, MatchResult, SnapshotMatcher, MIN_CONTAINED_ALIAS_CHARS};
pub use normalize::{normalize, Normalizer, NormalizerConfig, DEFAULT_STOPLIST};

pub const VERDICTS_SCHEMA: &str = "tempofact.verdicts/1";

/// Ordered by precedence: correct > outdated > irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Irrelevant,
    Outdated,
    Correct,
}

impl Classification {
    pub const ALL: [Classification; 3] =
        [Classification::Correct, Classification::Outdated, Classification::Irrelevant];

    pub fn letter(self) -> char {
        match self {
            Classification::Correct => 'C',
            Classification::Outdated => 'O',
            Classification::Irrelevant => 'I',
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Correct => "correct",
            Classification::Outdated => "outdated",
            Classification::Irrelevant => "irrelevant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedEntry {
    pub canonical_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_qid: Option<String>,
    pub interval: ValidityInterval,
}

impl MatchedEntry {
    pub fn identity(&self) -> String {
        match &self.entity_qid {
            Some(q) => q.clone(),
            None => format!("label:{}", self.canonical_label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub fact_id: String,
    pub prompt_index: u8,
    pub model_id: String,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<MatchedEntry>,
    pub normalized_text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub from_error: bool,
}

impl Verdict {
    pub fn sort_key(&self) -> (&str, u8, &str) {
        (&self.fact_id, self.prompt_index, &self.model_id)
    }
}

/// Judges one response with a prepared matcher for its fact.
pub fn judge_with(matcher: &SnapshotMatcher<'_>, normalizer: &Normalizer, record: &ResponseRecord) -> Result<Verdict> {
    let snapshot = matcher.snapshot();
    if record.fact_id != snapshot.fact_id {
        return Err(Error::FactMismatch {
            response: record.fact_id.clone(),
            snapshot: snapshot.fact_id.clone(),
        });
    }
    let Some(text) = record.raw_text() else {
        return Ok(Verdict {
            fact_id: record.fact_id.clone(),
            prompt_index: record.prompt_index,
            model_id: record.model_id.clone(),
            classification: Classification::Irrelevant,
            matched: None,
            normalized_text: String::new(),
            from_error: true,
        });
    };
    let tokens = normalizer.normalize_tokens(text);
    let result = matcher.classify_tokens(&tokens);
    let matched = result.entry.map(|i| {
        let e = &snapshot.entries[i];
        MatchedEntry {
            canonical_label: e.canonical_label.clone(),
            entity_qid: e.entity_qid.clone(),
            interval: e.interval,
        }
    });
    Ok(Verdict {
        fact_id: record.fact_id.clone(),
        prompt_index: record.prompt_index,
        model_id: record.model_id.clone(),
        classification: result.classification,
        matched,
        normalized_text: tokens.join(" "),
        from_error: false,
    })
}

pub fn judge_response(record: &ResponseRecord, snapshot: &AnswerSnapshot, normalizer: &Normalizer) -> Result<Verdict> {
    judge_with(&SnapshotMatcher::new(snapshot, normalizer), normalizer, record)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictHeader {
    pub schema_version: String,
    pub run_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerdictSet {
    pub run_id: String,
    pub verdicts: Vec<Verdict>,
}

impl VerdictSet {
    pub fn new(run_id: impl Into<String>, mut verdicts: Vec<Verdict>) -> Self {
        verdicts.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        VerdictSet {
            run_id: run_id.into(),
            verdicts,
        }
    }

    pub fn model_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.verdicts.iter().map(|v| v.model_id.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn for_model<'a>(&'a self, model_id: &'a str) -> impl Iterator<Item = &'a Verdict> + 'a {
        self.verdicts.iter().filter(move |v| v.model_id == model_id)
    }

    pub fn to_jsonl(&self) -> Result<String> {
        io::to_jsonl(
            &VerdictHeader {
                schema_version: VERDICTS_SCHEMA.to_string(),
                run_id: self.run_id.clone(),
            },
            &self.verdicts,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::atomic_write(path, self.to_jsonl()?.as_bytes())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let (header, verdicts): (VerdictHeader, Vec<Verdict>) = io::parse_jsonl(text, context, VERDICTS_SCHEMA)?;
        Ok(VerdictSet::new(header.run_id, verdicts))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&io::read_text(path)?, &path.display().to_string())
    }

    /// Concatenates several verdict files, e.g. one per model.
    pub fn merge(run_id: impl Into<String>, sets: impl IntoIterator<Item = VerdictSet>) -> Self {
        VerdictSet::new(run_id, sets.into_iter().flat_map(|s| s.verdicts).collect())
    }
}

/// Judges every response against its fact's snapshot.
pub fn judge_run(
    responses: &[ResponseSet],
    snapshots: &BTreeMap<String, AnswerSnapshot>,
    normalizer: &Normalizer,
    run_id: impl Into<String>,
) -> Result<VerdictSet> {
    let mut missing: Vec<String> = responses
        .iter()
        .flat_map(|s| &s.records)
        .filter(|r| !snapshots.contains_key(&r.fact_id))
        .map(|r| r.fact_id.clone())
        .collect();
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::MissingSnapshot { fact_ids: missing });
    }
    let matchers: BTreeMap<&str, SnapshotMatcher<'_>> = snapshots
        .iter()
        .map(|(id, s)| (id.as_str(), SnapshotMatcher::new(s, normalizer)))
        .collect();
    let mut verdicts = Vec::new();
    for record in responses.iter().flat_map(|s| &s.records) {
        verdicts.push(judge_with(&matchers[record.fact_id.as_str()], normalizer, record)?);
    }
    let set = VerdictSet::new(run_id, verdicts);
    validate_verdicts(&set.verdicts, snapshots)?;
    Ok(set)
}

/// Checks classification/match consistency of finished verdicts.
pub fn validate_verdicts(verdicts: &[Verdict], snapshots: &BTreeMap<String, AnswerSnapshot>) -> Result<()> {
    for v in verdicts {
        let bad = |m: &str| Error::invalid(&v.fact_id, format!("verdict {} ({}): {m}", v.prompt_index, v.model_id));
        match (v.classification, &v.matched) {
            (Classification::Irrelevant, Some(_)) => return Err(bad("irrelevant verdict has a match")),
            (Classification::Correct | Classification::Outdated, None) => {
                return Err(bad("correct/outdated verdict lacks a match"))
            }
            _ => {}
        }
        if v.from_error && v.classification != Classification::Irrelevant {
            return Err(bad("error response judged relevant"));
        }
        if let (Some(m), Some(snap)) = (&v.matched, snapshots.get(&v.fact_id)) {
            let current = snap.current_indices();
            let hit = snap.entries.iter().enumerate().find(|(_, e)| {
                e.canonical_label == m.canonical_label && e.entity_qid == m.entity_qid && e.interval == m.interval
            });
            match hit {
                None => return Err(bad("matched entry is not in the snapshot")),
                Some((i, _)) => {
                    let is_current = current.contains(&i);
                    if (v.classification == Classification::Correct) != is_current {
                        return Err(bad("classification disagrees with the entry's currency"));
                    }
                }
            }
        }
    }
    Ok(())
}
