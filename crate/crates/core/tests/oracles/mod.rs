//! Independent reference implementations and random case generators.
//! Shared by the property tests here and the acceptance harness.

#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;
use tempofact_core::judge::{Classification, MatchedEntry, Normalizer, Verdict};
use tempofact_core::wikidata::{AnswerEntry, AnswerSnapshot, PartialDate, Rank, ValidityInterval};

const WORDS: &[&str] = &[
    "real", "madrid", "juventus", "nassr", "al", "united", "city", "fc", "sporting", "inter",
    "miami", "boston", "celtics", "red", "bull", "racing", "emmanuel", "macron", "xi", "jinping",
    "olaf", "scholz", "lula", "da", "silva", "piñera", "dončić", "andersson", "björk", "müller",
    "president", "king", "sir", "of", "the", "club", "team", "a", "fc", "cf", "psg", "ac", "sc",
];

const FILLER: &[&str] = &[
    "he", "plays", "for", "currently", "is", "the", "answer", "i", "think", "it", "was", "now",
    "team", "club", "member", "of", "and", "previously", "president", "leader",
];

fn phrase<R: Rng>(rng: &mut R, max_tokens: usize) -> String {
    let n = rng.random_range(1..=max_tokens);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

/// Surface variation that normalization must undo.
fn decorate<R: Rng>(rng: &mut R, s: &str) -> String {
    let mut out = String::new();
    for (i, tok) in s.split(' ').enumerate() {
        if i > 0 {
            out.push_str(match rng.random_range(0..4) {
                0 => "-",
                1 => "  ",
                _ => " ",
            });
        }
        match rng.random_range(0..4) {
            0 => out.push_str(&tok.to_uppercase()),
            1 => {
                let mut c = tok.chars();
                if let Some(f) = c.next() {
                    out.extend(f.to_uppercase());
                    out.push_str(c.as_str());
                }
            }
            _ => out.push_str(tok),
        }
    }
    if rng.random_bool(0.3) {
        out.push('.');
    }
    out
}

pub fn random_snapshot<R: Rng>(rng: &mut R) -> AnswerSnapshot {
    let n = rng.random_range(1..=6);
    let entries = (0..n)
        .map(|i| {
            let label = format!("{} {}", phrase(rng, 3), i);
            let aliases: Vec<String> = (0..rng.random_range(0..=3)).map(|_| phrase(rng, 3)).collect();
            let start = rng.random_bool(0.85).then(|| rng.random_range(1950..=2023));
            let end = match (start, rng.random_range(0..3)) {
                (_, 0) => None,
                (Some(s), _) => Some(rng.random_range(s..=2024)),
                (None, _) => Some(rng.random_range(1950..=2024)),
            };
            let rank = match rng.random_range(0..10) {
                0 => Rank::Deprecated,
                1 | 2 => Rank::Preferred,
                _ => Rank::Normal,
            };
            AnswerEntry::new(
                label,
                rng.random_bool(0.7).then(|| format!("Q{}", 1000 + i)),
                aliases,
                ValidityInterval::new(start.map(PartialDate::year), end.map(PartialDate::year)).unwrap(),
                rank,
            )
        })
        .collect();
    AnswerSnapshot::new("case", Utc.with_ymd_and_hms(2023, 12, 18, 0, 0, 0).unwrap(), "oracle", entries).unwrap()
}

/// A response that usually embeds one or two aliases among filler words.
pub fn random_output<R: Rng>(rng: &mut R, snap: &AnswerSnapshot) -> String {
    let mut parts: Vec<String> = Vec::new();
    let embeds = rng.random_range(0..=2);
    for _ in 0..rng.random_range(0..=3) {
        parts.push(FILLER.choose(rng).unwrap().to_string());
    }
    for _ in 0..embeds {
        let e = snap.entries.choose(rng).unwrap();
        let a = e.aliases.choose(rng).unwrap();
        parts.push(decorate(rng, a));
        for _ in 0..rng.random_range(0..=2) {
            parts.push(FILLER.choose(rng).unwrap().to_string());
        }
    }
    if embeds == 0 && rng.random_bool(0.5) {
        parts.push(phrase(rng, 2));
    }
    parts.join(" ")
}

/// Current entries recomputed from first principles.
pub fn oracle_current(snap: &AnswerSnapshot) -> Vec<usize> {
    let mut open = Vec::new();
    let mut preferred = Vec::new();
    for (i, e) in snap.entries.iter().enumerate() {
        if e.interval.end.is_none() && e.rank != Rank::Deprecated {
            open.push(i);
        }
        if e.rank == Rank::Preferred {
            preferred.push(i);
        }
    }
    if open.is_empty() {
        preferred
    } else {
        open
    }
}

/// Brute force over every alias using padded substring search.
pub fn oracle_classify(snap: &AnswerSnapshot, text: &str) -> (Classification, Option<usize>) {
    let n = Normalizer::default();
    let resp = n.normalize(text);
    let padded = format!(" {resp} ");
    // (entry, exact?) for every entry with some matching alias
    let mut hits: Vec<(usize, bool)> = Vec::new();
    for (i, e) in snap.entries.iter().enumerate() {
        let mut exact = false;
        let mut contained = false;
        for a in &e.aliases {
            let na = n.normalize(a);
            if na.is_empty() {
                continue;
            }
            if na == resp {
                exact = true;
            }
            let one_short = !na.contains(' ') && na.chars().count() < 4;
            if !one_short && padded.contains(&format!(" {na} ")) {
                contained = true;
            }
        }
        if exact || contained {
            hits.push((i, exact));
        }
    }
    if hits.is_empty() {
        return (Classification::Irrelevant, None);
    }
    let current = oracle_current(snap);
    let in_current: Vec<(usize, bool)> = hits.iter().copied().filter(|(i, _)| current.contains(i)).collect();
    let (class, pool) = if in_current.is_empty() {
        (Classification::Outdated, hits)
    } else {
        (Classification::Correct, in_current)
    };
    // exact first, then latest start (undated oldest), then lowest index
    let mut best = pool[0];
    for &cand in &pool[1..] {
        let key = |(i, ex): (usize, bool)| (ex, snap.entries[i].interval.start, std::cmp::Reverse(i));
        if key(cand) > key(best) {
            best = cand;
        }
    }
    (class, Some(best.0))
}

pub fn oracle_upper_bound(p: [Classification; 3]) -> Classification {
    if p.contains(&Classification::Correct) {
        Classification::Correct
    } else if p.contains(&Classification::Outdated) {
        Classification::Outdated
    } else {
        Classification::Irrelevant
    }
}

/// Median-exclusive quartiles by depth counting: each quartile sits at depth
/// (floor(n/2) + 1) / 2 from its end of the sorted sample.
pub fn reference_quartiles(years: &[i32]) -> (f64, f64, f64, f64, f64) {
    let mut s: Vec<f64> = years.iter().map(|&y| y as f64).collect();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let at_depth = |xs: &[f64], d: f64| {
        let lo = xs[(d.floor() as usize) - 1];
        let hi = xs[(d.ceil() as usize) - 1];
        (lo + hi) / 2.0
    };
    let median = at_depth(&s, (n as f64 + 1.0) / 2.0);
    if n == 1 {
        return (s[0], s[0], s[0], s[0], s[0]);
    }
    let d_q = ((n / 2) as f64 + 1.0) / 2.0;
    let q1 = at_depth(&s, d_q);
    let rev: Vec<f64> = s.iter().rev().copied().collect();
    let q3 = at_depth(&rev, d_q);
    (s[0], q1, median, q3, s[n - 1])
}

/// A random complete verdict set for one model (3 prompts per fact).
pub fn random_verdicts<R: Rng>(rng: &mut R, model: &str) -> Vec<Verdict> {
    let n_facts = rng.random_range(1..=40);
    let mut out = Vec::new();
    for f in 0..n_facts {
        for p in 0..3u8 {
            let c = *[Classification::Correct, Classification::Outdated, Classification::Irrelevant]
                .choose(rng)
                .unwrap();
            let matched = (c != Classification::Irrelevant).then(|| MatchedEntry {
                canonical_label: format!("e{}", rng.random_range(0..4)),
                entity_qid: None,
                interval: ValidityInterval::new(Some(PartialDate::year(rng.random_range(1990..=2023))), None).unwrap(),
            });
            out.push(Verdict {
                fact_id: format!("fact{f:03}"),
                prompt_index: p,
                model_id: model.to_string(),
                classification: c,
                matched,
                normalized_text: format!("t{}", rng.random_range(0..3)),
                from_error: false,
            });
        }
    }
    out
}
