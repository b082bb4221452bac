use super::{Classification, Normalizer};
use crate::wikidata::AnswerSnapshot;

/// Aliases of one token shorter than this only match exactly.
pub const MIN_CONTAINED_ALIAS_CHARS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Exact,
    Contained,
}

struct PreparedEntry {
    aliases: Vec<Vec<String>>,
    current: bool,
}

/// A snapshot with its aliases normalized once, ready to classify many
/// responses.
pub struct SnapshotMatcher<'a> {
    snapshot: &'a AnswerSnapshot,
    entries: Vec<PreparedEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub classification: Classification,
    /// Index into the snapshot's entries.
    pub entry: Option<usize>,
    pub kind: Option<MatchKind>,
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty()
        && needle.len() <= haystack.len()
        && haystack.windows(needle.len()).any(|w| w == needle)
}

impl<'a> SnapshotMatcher<'a> {
    pub fn new(snapshot: &'a AnswerSnapshot, normalizer: &Normalizer) -> Self {
        let current = snapshot.current_indices();
        let entries = snapshot
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut aliases: Vec<Vec<String>> = e
                    .aliases
                    .iter()
                    .map(|a| normalizer.normalize_tokens(a))
                    .filter(|t| !t.is_empty())
                    .collect();
                aliases.dedup();
                PreparedEntry {
                    aliases,
                    current: current.contains(&i),
                }
            })
            .collect();
        SnapshotMatcher { snapshot, entries }
    }

    pub fn snapshot(&self) -> &AnswerSnapshot {
        self.snapshot
    }

    fn entry_match(&self, idx: usize, tokens: &[String]) -> Option<MatchKind> {
        let mut best = None;
        for alias in &self.entries[idx].aliases {
            if alias.as_slice() == tokens {
                return Some(MatchKind::Exact);
            }
            let short = alias.len() == 1 && alias[0].chars().count() < MIN_CONTAINED_ALIAS_CHARS;
            if !short && contains_run(tokens, alias) {
                best = Some(MatchKind::Contained);
            }
        }
        best
    }

    /// Classifies normalized response tokens.
    ///
    /// Every entry with an exact or contained alias match is a candidate.
    /// If any candidate is current the verdict is correct, otherwise it is
    /// outdated. The reported entry prefers exact matches, then the latest
    /// start date, then canonical order.
    pub fn classify_tokens(&self, tokens: &[String]) -> MatchResult {
        let candidates: Vec<(usize, MatchKind)> = (0..self.entries.len())
            .filter_map(|i| self.entry_match(i, tokens).map(|k| (i, k)))
            .collect();
        if candidates.is_empty() {
            return MatchResult {
                classification: Classification::Irrelevant,
                entry: None,
                kind: None,
            };
        }
        let current: Vec<(usize, MatchKind)> = candidates
            .iter()
            .copied()
            .filter(|(i, _)| self.entries[*i].current)
            .collect();
        let (classification, pool) = if current.is_empty() {
            (Classification::Outdated, candidates)
        } else {
            (Classification::Correct, current)
        };
        let (entry, kind) = pool
            .into_iter()
            .min_by(|(a, ka), (b, kb)| {
                let exact = |k: &MatchKind| if *k == MatchKind::Exact { 0 } else { 1 };
                let sa = self.snapshot.entries[*a].interval.start;
                let sb = self.snapshot.entries[*b].interval.start;
                exact(ka)
                    .cmp(&exact(kb))
                    .then(sb.cmp(&sa))
                    .then(a.cmp(b))
            })
            .expect("pool is non-empty");
        MatchResult {
            classification,
            entry: Some(entry),
            kind: Some(kind),
        }
    }

    pub fn classify(&self, normalizer: &Normalizer, text: &str) -> MatchResult {
        self.classify_tokens(&normalizer.normalize_tokens(text))
    }
}
