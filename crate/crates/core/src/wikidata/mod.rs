//! Temporally-qualified answer sets retrieved from Wikidata.
//!
//! Each fact's answer set is an [`AnswerSnapshot`]: every statement value of
//! `(subject, property)` with its start/end qualifiers, rank and English
//! aliases, stamped with the retrieval time. An absent end date means the
//! value is currently valid ("Now"); no sentinel dates are ever stored.
//!
//! Policy choices that Wikidata itself leaves open:
//! - deprecated-rank statements are kept but never count as current;
//! - a statement whose start lies after its end is dropped with a warning;
//! - statements without a start qualifier sort after every dated statement.

mod client;
mod sparql;
mod store;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use client::{
    fetch_answer_set, fetch_answer_sets, FetchOutcome, FixtureTransport, HttpSparqlTransport,
    SparqlTransport, DEFAULT_ENDPOINT,
};
pub use sparql::{answer_set_query, parse_sparql_results};
pub use store::{
    load_snapshot, load_snapshot_dir, save_snapshot, snapshot_file_name, snapshot_file_string, snapshot_to_string,
    SNAPSHOT_SCHEMA,
};

/// A calendar date at year, month or day precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartialDate {
    pub year: i32,
    pub month: Option<u32>,
    pub day: Option<u32>,
}

impl PartialDate {
    pub fn year(year: i32) -> Self {
        PartialDate {
            year,
            month: None,
            day: None,
        }
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day)?;
        Some(PartialDate {
            year,
            month: Some(month),
            day: Some(day),
        })
    }

    /// First day of the period the date denotes.
    pub fn start_of_period(&self) -> (i32, u32, u32) {
        (self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
    }

    /// Last day of the period the date denotes.
    pub fn end_of_period(&self) -> (i32, u32, u32) {
        match (self.month, self.day) {
            (Some(m), Some(d)) => (self.year, m, d),
            (Some(m), None) => (self.year, m, 31),
            _ => (self.year, 12, 31),
        }
    }

    fn precision_rank(&self) -> u8 {
        match (self.month, self.day) {
            (None, _) => 0,
            (Some(_), None) => 1,
            (Some(_), Some(_)) => 2,
        }
    }
}

impl Ord for PartialDate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.start_of_period()
            .cmp(&other.start_of_period())
            .then(self.precision_rank().cmp(&other.precision_rank()))
    }
}

impl PartialOrd for PartialDate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.year < 0 {
            write!(f, "-{:04}", -(self.year as i64))?;
        } else {
            write!(f, "{:04}", self.year)?;
        }
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
            if let Some(d) = self.day {
                write!(f, "-{d:02}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for PartialDate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut parts = body.split('-');
        let year: i32 = parts
            .next()
            .filter(|y| !y.is_empty() && y.chars().all(|c| c.is_ascii_digit()))
            .and_then(|y| y.parse().ok())
            .ok_or_else(|| format!("bad year in date `{s}`"))?;
        let year = if negative { -year } else { year };
        let month = parts
            .next()
            .map(|m| m.parse::<u32>().map_err(|_| format!("bad month in date `{s}`")))
            .transpose()?;
        let day = parts
            .next()
            .map(|d| d.parse::<u32>().map_err(|_| format!("bad day in date `{s}`")))
            .transpose()?;
        if parts.next().is_some() {
            return Err(format!("trailing components in date `{s}`"));
        }
        match (month, day) {
            (None, None) => Ok(PartialDate::year(year)),
            (Some(m), None) if (1..=12).contains(&m) => Ok(PartialDate {
                year,
                month: Some(m),
                day: None,
            }),
            (Some(m), Some(d)) => {
                PartialDate::ymd(year, m, d).ok_or_else(|| format!("invalid calendar date `{s}`"))
            }
            _ => Err(format!("invalid date `{s}`")),
        }
    }
}

impl Serialize for PartialDate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartialDate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The period during which a value was the correct answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ValidityInterval {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<PartialDate>,
    /// `None` means the value is still valid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<PartialDate>,
}

impl ValidityInterval {
    /// Rejects intervals whose start period begins after the end period closes.
    pub fn new(start: Option<PartialDate>, end: Option<PartialDate>) -> Result<Self, String> {
        if let (Some(s), Some(e)) = (start, end) {
            if s.start_of_period() > e.end_of_period() {
                return Err(format!("start {s} is after end {e}"));
            }
        }
        Ok(ValidityInterval { start, end })
    }

    pub fn is_open(&self) -> bool {
        self.end.is_none()
    }

    pub fn start_year(&self) -> Option<i32> {
        self.start.map(|d| d.year)
    }
}

impl fmt::Display for ValidityInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.start {
            Some(s) => write!(f, "[{s}, ")?,
            None => write!(f, "[?, ")?,
        }
        match self.end {
            Some(e) => write!(f, "{e}]"),
            None => write!(f, "Now]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Preferred,
    Normal,
    Deprecated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub canonical_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_qid: Option<String>,
    /// Always contains `canonical_label`, listed first.
    pub aliases: Vec<String>,
    pub interval: ValidityInterval,
    pub rank: Rank,
}

impl AnswerEntry {
    pub fn new(
        canonical_label: impl Into<String>,
        entity_qid: Option<String>,
        aliases: impl IntoIterator<Item = String>,
        interval: ValidityInterval,
        rank: Rank,
    ) -> Self {
        let canonical_label = canonical_label.into();
        let mut rest: Vec<String> = aliases
            .into_iter()
            .filter(|a| !a.trim().is_empty() && *a != canonical_label)
            .collect();
        rest.sort();
        rest.dedup();
        let mut all = Vec::with_capacity(rest.len() + 1);
        all.push(canonical_label.clone());
        all.extend(rest);
        AnswerEntry {
            canonical_label,
            entity_qid,
            aliases: all,
            interval,
            rank,
        }
    }

    /// Open-ended and not deprecated.
    pub fn is_open_current(&self) -> bool {
        self.rank != Rank::Deprecated && self.interval.is_open()
    }

    /// Identity used when comparing resolved answers across prompts.
    pub fn identity(&self) -> String {
        match &self.entity_qid {
            Some(q) => q.clone(),
            None => format!("label:{}", self.canonical_label),
        }
    }

    fn validate(&self, fact_id: &str) -> Result<()> {
        if self.aliases.is_empty() || !self.aliases.contains(&self.canonical_label) {
            return Err(Error::invalid(
                fact_id,
                format!("entry `{}` aliases must contain its label", self.canonical_label),
            ));
        }
        ValidityInterval::new(self.interval.start, self.interval.end)
            .map_err(|m| Error::invalid(fact_id, format!("entry `{}`: {m}", self.canonical_label)))?;
        Ok(())
    }
}

/// Canonical entry ordering: start date descending, undated last.
pub(crate) fn canonical_order(a: &AnswerEntry, b: &AnswerEntry) -> Ordering {
    let by_start = match (a.interval.start, b.interval.start) {
        (Some(x), Some(y)) => y.cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    let by_end = match (a.interval.end, b.interval.end) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => y.cmp(&x),
    };
    by_start
        .then(by_end)
        .then_with(|| a.rank.cmp(&b.rank))
        .then_with(|| a.canonical_label.cmp(&b.canonical_label))
        .then_with(|| a.entity_qid.cmp(&b.entity_qid))
        .then_with(|| a.aliases.cmp(&b.aliases))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSnapshot {
    pub fact_id: String,
    pub retrieved_at: DateTime<Utc>,
    pub source_endpoint: String,
    /// Set when no entry qualifies as current.
    pub degraded: bool,
    pub entries: Vec<AnswerEntry>,
}

impl AnswerSnapshot {
    /// Builds a snapshot in canonical order with the degraded flag computed.
    pub fn new(
        fact_id: impl Into<String>,
        retrieved_at: DateTime<Utc>,
        source_endpoint: impl Into<String>,
        mut entries: Vec<AnswerEntry>,
    ) -> Result<Self> {
        let fact_id = fact_id.into();
        if entries.is_empty() {
            return Err(Error::EmptyAnswer { fact_id });
        }
        entries.sort_by(canonical_order);
        let mut snap = AnswerSnapshot {
            fact_id,
            retrieved_at,
            source_endpoint: source_endpoint.into(),
            degraded: false,
            entries,
        };
        snap.degraded = snap.current_indices().is_empty();
        Ok(snap)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::EmptyAnswer {
                fact_id: self.fact_id.clone(),
            });
        }
        for entry in &self.entries {
            entry.validate(&self.fact_id)?;
        }
        if self.degraded != self.current_indices().is_empty() {
            return Err(Error::invalid(
                &self.fact_id,
                "degraded flag disagrees with the entries",
            ));
        }
        Ok(())
    }

    /// Indices of the current entries: open-ended non-deprecated ones, or, if
    /// there are none, the preferred-rank ones.
    pub fn current_indices(&self) -> Vec<usize> {
        let open: Vec<usize> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_open_current())
            .map(|(i, _)| i)
            .collect();
        if !open.is_empty() {
            return open;
        }
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.rank == Rank::Preferred)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn current_entries(&self) -> Result<Vec<&AnswerEntry>> {
        let idx = self.current_indices();
        if idx.is_empty() {
            return Err(Error::DegradedSnapshot {
                fact_id: self.fact_id.clone(),
            });
        }
        Ok(idx.into_iter().map(|i| &self.entries[i]).collect())
    }
}

pub fn current_entries(snapshot: &AnswerSnapshot) -> Result<Vec<&AnswerEntry>> {
    snapshot.current_entries()
}
