use serde::{Deserialize, Serialize};

use super::single_model;
use crate::error::{Error, Result};
use crate::judge::{Classification, Verdict};

/// Five-number summary of the start years of matched answers.
///
/// Quartiles are median-exclusive: Q1 and Q3 are the medians of the lower
/// and upper halves, and with an odd count the median belongs to neither.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub model_id: String,
    pub min_year: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max_year: f64,
    pub n_points: usize,
    /// Correct/outdated verdicts whose matched entry has no start date.
    pub skipped_n: usize,
}

fn median(sorted: &[i32]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

/// Summary of a non-empty year multiset; `None` when empty.
pub fn box_stats(years: &[i32]) -> Option<(f64, f64, f64, f64, f64)> {
    if years.is_empty() {
        return None;
    }
    let mut sorted = years.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let half = n / 2;
    let (q1, q3) = if half == 0 {
        (sorted[0] as f64, sorted[0] as f64)
    } else {
        (median(&sorted[..half]), median(&sorted[n - half..]))
    };
    Some((sorted[0] as f64, q1, median(&sorted), q3, sorted[n - 1] as f64))
}

pub fn temporal_box_stats(verdicts: &[Verdict]) -> Result<BoxStats> {
    let model_id = single_model(verdicts)?.to_string();
    let mut years = Vec::new();
    let mut skipped_n = 0;
    for v in verdicts {
        if v.classification == Classification::Irrelevant {
            continue;
        }
        match v.matched.as_ref().and_then(|m| m.interval.start_year()) {
            Some(y) => years.push(y),
            None => skipped_n += 1,
        }
    }
    let (min_year, q1, median, q3, max_year) =
        box_stats(&years).ok_or_else(|| Error::NoDatedMatches { model_id: model_id.clone() })?;
    Ok(BoxStats {
        model_id,
        min_year,
        q1,
        median,
        q3,
        max_year,
        n_points: years.len(),
        skipped_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tests::verdict;

    #[test]
    fn singleton() {
        assert_eq!(box_stats(&[2018]), Some((2018.0, 2018.0, 2018.0, 2018.0, 2018.0)));
    }

    #[test]
    fn odd_and_even_counts() {
        let (min, _, med, _, max) = box_stats(&[2016, 2006, 2020, 2012, 2014]).unwrap();
        assert_eq!((min, med, max), (2006.0, 2014.0, 2020.0));
        let (_, q1, med, q3, _) = box_stats(&[2013, 2014, 2015, 2016, 2017, 2018]).unwrap();
        assert_eq!((q1, med, q3), (2014.0, 2015.5, 2017.0));
    }

    #[test]
    fn undated_matches_are_counted_not_plotted() {
        use Classification::*;
        let vs = vec![
            verdict("a", 0, Correct, Some(2018)),
            verdict("a", 1, Outdated, None),
            verdict("a", 2, Irrelevant, None),
        ];
        let b = temporal_box_stats(&vs).unwrap();
        assert_eq!((b.n_points, b.skipped_n), (1, 1));
        let none = vec![verdict("a", 0, Irrelevant, None)];
        assert!(matches!(temporal_box_stats(&none), Err(Error::NoDatedMatches { .. })));
    }
}
