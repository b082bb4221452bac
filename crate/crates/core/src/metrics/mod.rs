//! Scores computed from verdict sets.
//!
//! All arithmetic is on exact [`Fraction`]s; percentages are derived only
//! when a report is presented.

mod edit;
mod rates;
mod temporal;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::judge::Verdict;
use crate::registry::PROMPTS_PER_FACT;

pub use edit::{
    edit_targets, efficacy_success, evaluate_edits, harmonic_mean, paraphrase_success,
    scalability_series, EditOutcome, ScalabilityPoint,
};
pub use rates::{
    aggregate_average, aggregate_upper_bound, prompt_agreement, upper_bound, AgreementReport,
    ClassCounts, FactVerdict, RateMode, RateReport,
};
pub use temporal::{box_stats, temporal_box_stats, BoxStats};

/// A non-negative rational number in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { num: 0, den: 1 };
    pub const ONE: Fraction = Fraction { num: 1, den: 1 };

    /// Panics on a zero denominator.
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "fraction with zero denominator");
        let g = gcd(num, den).max(1);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn percent(self) -> f64 {
        100.0 * self.to_f64()
    }

    /// `2ep / (e + p)`, or zero when both are zero.
    pub fn harmonic_mean(self, other: Fraction) -> Fraction {
        let (a, b, c, d) = (
            self.num as u128,
            self.den as u128,
            other.num as u128,
            other.den as u128,
        );
        let sum = a * d + b * c;
        if sum == 0 {
            return Fraction::ZERO;
        }
        let num = 2 * a * c;
        let g = {
            let (mut x, mut y) = (num, sum);
            while y != 0 {
                (x, y) = (y, x % y);
            }
            x.max(1)
        };
        Fraction::new((num / g) as u64, (sum / g) as u64)
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// The model every verdict belongs to; rejects empty and mixed input.
pub(crate) fn single_model(verdicts: &[Verdict]) -> Result<&str> {
    let first = verdicts.first().ok_or_else(|| Error::Validation {
        fact_id: None,
        message: "no verdicts to score".into(),
    })?;
    if let Some(other) = verdicts.iter().find(|v| v.model_id != first.model_id) {
        return Err(Error::Validation {
            fact_id: None,
            message: format!(
                "verdicts mix models `{}` and `{}`; score one model at a time",
                first.model_id, other.model_id
            ),
        });
    }
    Ok(&first.model_id)
}

/// Groups one model's verdicts by fact, requiring prompts 0, 1 and 2 exactly
/// once each. Facts come back sorted by id.
pub(crate) fn by_fact(verdicts: &[Verdict]) -> Result<Vec<(String, [&Verdict; PROMPTS_PER_FACT])>> {
    let model_id = single_model(verdicts)?;
    let mut grouped: std::collections::BTreeMap<&str, [Option<&Verdict>; PROMPTS_PER_FACT]> =
        Default::default();
    let mut broken: std::collections::BTreeSet<String> = Default::default();
    for v in verdicts {
        let slots = grouped.entry(&v.fact_id).or_default();
        match slots.get_mut(v.prompt_index as usize) {
            Some(slot @ None) => *slot = Some(v),
            _ => {
                broken.insert(v.fact_id.clone());
            }
        }
    }
    let mut out = Vec::with_capacity(grouped.len());
    for (fact_id, slots) in grouped {
        match slots {
            [Some(a), Some(b), Some(c)] if !broken.contains(fact_id) => out.push((fact_id.to_string(), [a, b, c])),
            _ => {
                broken.insert(fact_id.to_string());
            }
        }
    }
    if !broken.is_empty() {
        return Err(Error::IncompleteVerdicts {
            model_id: model_id.to_string(),
            fact_ids: broken.into_iter().collect(),
        });
    }
    Ok(out)
}
