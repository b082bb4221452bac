use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{aggregate_upper_bound, single_model, Fraction};
use crate::error::{Error, Result};
use crate::judge::{Classification, Verdict};

/// Prompt asked verbatim after editing; the other two are paraphrases.
const ORIGINAL_PROMPT: u8 = 0;
const PARAPHRASE_PROMPTS: [u8; 2] = [1, 2];

/// `2ep / (e + p)`, zero when `e + p = 0`.
pub fn harmonic_mean(e: f64, p: f64) -> Result<f64> {
    for x in [e, p] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("{x}")));
        }
    }
    if e + p == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * e * p / (e + p))
}

/// Facts whose pre-edit upper-bound verdict is outdated, sorted by id.
pub fn edit_targets(pre: &[Verdict]) -> Result<Vec<String>> {
    let (facts, _) = aggregate_upper_bound(pre)?;
    Ok(facts
        .into_iter()
        .filter(|f| f.upper_bound == Classification::Outdated)
        .map(|f| f.fact_id)
        .collect())
}

struct PostIndex<'a>(HashMap<(&'a str, u8), &'a Verdict>);

impl<'a> PostIndex<'a> {
    fn new(post: &'a [Verdict]) -> Result<Self> {
        single_model(post)?;
        Ok(PostIndex(
            post.iter().map(|v| ((v.fact_id.as_str(), v.prompt_index), v)).collect(),
        ))
    }

    fn correct(&self, fact_id: &str, prompt_index: u8) -> Result<bool> {
        self.0
            .get(&(fact_id, prompt_index))
            .map(|v| v.classification == Classification::Correct)
            .ok_or_else(|| Error::MissingPostEdit {
                fact_id: fact_id.to_string(),
                prompt_index,
            })
    }

    fn share(&self, targets: &[String], prompts: &[u8]) -> Result<Fraction> {
        if targets.is_empty() {
            return Err(Error::NoEditTargets);
        }
        let mut hits = 0u64;
        for t in targets {
            for &p in prompts {
                hits += u64::from(self.correct(t, p)?);
            }
        }
        Ok(Fraction::new(hits, (targets.len() * prompts.len()) as u64))
    }
}

/// Share of targets answered correctly on the original prompt after editing.
pub fn efficacy_success(post: &[Verdict], targets: &[String]) -> Result<Fraction> {
    PostIndex::new(post)?.share(targets, &[ORIGINAL_PROMPT])
}

/// Share of (target, paraphrase) pairs answered correctly after editing.
pub fn paraphrase_success(post: &[Verdict], targets: &[String]) -> Result<Fraction> {
    PostIndex::new(post)?.share(targets, &PARAPHRASE_PROMPTS)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditOutcome {
    pub model_id: String,
    pub editor_id: String,
    pub n_outdated: usize,
    pub efficacy_success: Fraction,
    pub paraphrase_success: Fraction,
    pub harmonic_mean: Fraction,
}

pub fn evaluate_edits(pre: &[Verdict], post: &[Verdict], editor_id: &str) -> Result<EditOutcome> {
    let model_id = single_model(pre)?.to_string();
    let targets = edit_targets(pre)?;
    if targets.is_empty() {
        return Err(Error::NoEditTargets);
    }
    let index = PostIndex::new(post)?;
    let e = index.share(&targets, &[ORIGINAL_PROMPT])?;
    let p = index.share(&targets, &PARAPHRASE_PROMPTS)?;
    Ok(EditOutcome {
        model_id,
        editor_id: editor_id.to_string(),
        n_outdated: targets.len(),
        efficacy_success: e,
        paraphrase_success: p,
        harmonic_mean: e.harmonic_mean(p),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalabilityPoint {
    pub n_edits: usize,
    pub harmonic_mean: Fraction,
}

/// Harmonic mean on seeded random subsets of the edit targets. Every size
/// reuses the same shuffle, so smaller subsets nest inside larger ones.
pub fn scalability_series(pre: &[Verdict], post: &[Verdict], sizes: &[usize], seed: u64) -> Result<Vec<ScalabilityPoint>> {
    let mut targets = edit_targets(pre)?;
    if targets.is_empty() {
        return Err(Error::NoEditTargets);
    }
    for &n in sizes {
        if n == 0 || n > targets.len() {
            return Err(Error::SubsetTooLarge {
                requested: n,
                available: targets.len(),
            });
        }
    }
    let index = PostIndex::new(post)?;
    targets.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    sizes
        .iter()
        .map(|&n| {
            let subset = &targets[..n];
            let e = index.share(subset, &[ORIGINAL_PROMPT])?;
            let p = index.share(subset, &PARAPHRASE_PROMPTS)?;
            Ok(ScalabilityPoint {
                n_edits: n,
                harmonic_mean: e.harmonic_mean(p),
            })
        })
        .collect()
}
