use serde::{Deserialize, Serialize};

use super::{by_fact, Fraction};
use crate::error::Result;
use crate::judge::{Classification, Verdict};

pub fn upper_bound(per_prompt: &[Classification]) -> Classification {
    per_prompt.iter().copied().max().unwrap_or(Classification::Irrelevant)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactVerdict {
    pub fact_id: String,
    pub model_id: String,
    pub per_prompt: [Classification; 3],
    pub upper_bound: Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassCounts {
    pub correct: u64,
    pub outdated: u64,
    pub irrelevant: u64,
}

impl ClassCounts {
    pub fn add(&mut self, c: Classification) {
        match c {
            Classification::Correct => self.correct += 1,
            Classification::Outdated => self.outdated += 1,
            Classification::Irrelevant => self.irrelevant += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.correct + self.outdated + self.irrelevant
    }

    pub fn get(&self, c: Classification) -> u64 {
        match c {
            Classification::Correct => self.correct,
            Classification::Outdated => self.outdated,
            Classification::Irrelevant => self.irrelevant,
        }
    }

    /// Share of `c`; zero for empty counts.
    pub fn fraction(&self, c: Classification) -> Fraction {
        match self.total() {
            0 => Fraction::ZERO,
            t => Fraction::new(self.get(c), t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMode {
    UpperBound,
    Average,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    pub model_id: String,
    pub mode: RateMode,
    pub n_facts: usize,
    /// Facts under the upper bound, individual verdicts under averaging.
    pub counts: ClassCounts,
}

impl RateReport {
    pub fn fraction(&self, c: Classification) -> Fraction {
        self.counts.fraction(c)
    }

    pub fn pct(&self, c: Classification) -> f64 {
        self.fraction(c).percent()
    }
}

/// Per-fact best classification under correct > outdated > irrelevant.
pub fn aggregate_upper_bound(verdicts: &[Verdict]) -> Result<(Vec<FactVerdict>, RateReport)> {
    let groups = by_fact(verdicts)?;
    let model_id = verdicts[0].model_id.clone();
    let mut counts = ClassCounts::default();
    let facts: Vec<FactVerdict> = groups
        .into_iter()
        .map(|(fact_id, vs)| {
            let per_prompt = vs.map(|v| v.classification);
            let ub = upper_bound(&per_prompt);
            counts.add(ub);
            FactVerdict {
                fact_id,
                model_id: model_id.clone(),
                per_prompt,
                upper_bound: ub,
            }
        })
        .collect();
    let report = RateReport {
        model_id,
        mode: RateMode::UpperBound,
        n_facts: facts.len(),
        counts,
    };
    Ok((facts, report))
}

/// Every verdict weighted equally.
pub fn aggregate_average(verdicts: &[Verdict]) -> Result<RateReport> {
    let groups = by_fact(verdicts)?;
    let mut counts = ClassCounts::default();
    for (_, vs) in &groups {
        for v in vs {
            counts.add(v.classification);
        }
    }
    Ok(RateReport {
        model_id: verdicts[0].model_id.clone(),
        mode: RateMode::Average,
        n_facts: groups.len(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub model_id: String,
    pub n_facts: usize,
    pub n_agreeing: usize,
}

impl AgreementReport {
    pub fn fraction(&self) -> Fraction {
        match self.n_facts {
            0 => Fraction::ZERO,
            n => Fraction::new(self.n_agreeing as u64, n as u64),
        }
    }
}

/// The answer a verdict resolves to: the matched entity, else the normalized
/// text. Failed queries resolve to nothing and never agree.
fn resolved(v: &Verdict) -> Option<String> {
    if v.from_error {
        return None;
    }
    Some(match &v.matched {
        Some(m) => format!("entity:{}", m.identity()),
        None => format!("text:{}", v.normalized_text),
    })
}

/// Share of facts whose three prompts resolve to the same answer.
pub fn prompt_agreement(verdicts: &[Verdict]) -> Result<AgreementReport> {
    let groups = by_fact(verdicts)?;
    let n_agreeing = groups
        .iter()
        .filter(|(_, vs)| {
            let first = resolved(vs[0]);
            first.is_some() && vs.iter().all(|v| resolved(v) == first)
        })
        .count();
    Ok(AgreementReport {
        model_id: verdicts[0].model_id.clone(),
        n_facts: groups.len(),
        n_agreeing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::verdict;
    use Classification::*;

    #[test]
    fn upper_bound_examples() {
        assert_eq!(upper_bound(&[Outdated, Correct, Irrelevant]), Correct);
        assert_eq!(upper_bound(&[Outdated, Outdated, Irrelevant]), Outdated);
        assert_eq!(upper_bound(&[Irrelevant, Irrelevant, Irrelevant]), Irrelevant);
    }

    #[test]
    fn average_of_mixed_fact() {
        let vs = vec![
            verdict("a", 0, Correct, Some(2020)),
            verdict("a", 1, Outdated, Some(2010)),
            verdict("a", 2, Irrelevant, None),
        ];
        let r = aggregate_average(&vs).unwrap();
        for c in Classification::ALL {
            assert_eq!(r.fraction(c), Fraction::new(1, 3));
        }
        let (facts, ub) = aggregate_upper_bound(&vs).unwrap();
        assert_eq!(facts[0].upper_bound, Correct);
        assert_eq!(ub.fraction(Correct), Fraction::ONE);
    }

    fn text_verdict(idx: u8, text: &str) -> Verdict {
        let mut v = verdict("f", idx, Irrelevant, None);
        v.normalized_text = text.into();
        v
    }

    #[test]
    fn agreement_examples() {
        let same = vec![
            verdict("f", 0, Correct, Some(2021)),
            verdict("f", 1, Correct, Some(2021)),
            verdict("f", 2, Correct, Some(2021)),
        ];
        assert_eq!(prompt_agreement(&same).unwrap().fraction(), Fraction::ONE);
        let split = vec![text_verdict(0, "biden"), text_verdict(1, "biden"), text_verdict(2, "trump")];
        assert_eq!(prompt_agreement(&split).unwrap().fraction(), Fraction::ZERO);
    }

    #[test]
    fn failed_queries_never_agree() {
        let mut vs = vec![text_verdict(0, ""), text_verdict(1, ""), text_verdict(2, "")];
        assert_eq!(prompt_agreement(&vs).unwrap().n_agreeing, 1);
        for v in &mut vs {
            v.from_error = true;
        }
        assert_eq!(prompt_agreement(&vs).unwrap().n_agreeing, 0);
    }
}
