mod oracles;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempofact_core::adapters::{ResponseOutcome, ResponseRecord};
use tempofact_core::ike::{build_ike_prompt, retrieve_context, Demonstration, IkePromptSpec, SimilarityScorer, TokenCosine};
use tempofact_core::judge::{normalize, Classification, Normalizer, SnapshotMatcher};
use tempofact_core::metrics::{
    aggregate_average, aggregate_upper_bound, box_stats, harmonic_mean, prompt_agreement, scalability_series,
    upper_bound,
};
use tempofact_core::wikidata::{snapshot_to_string, PartialDate};

use oracles::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn upper_bound_exhaustive() {
    use Classification::*;
    for a in [Correct, Outdated, Irrelevant] {
        for b in [Correct, Outdated, Irrelevant] {
            for c in [Correct, Outdated, Irrelevant] {
                assert_eq!(upper_bound(&[a, b, c]), oracle_upper_bound([a, b, c]));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn classify_agrees_with_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let snap = random_snapshot(&mut r);
        let text = random_output(&mut r, &snap);
        let n = Normalizer::default();
        let got = SnapshotMatcher::new(&snap, &n).classify(&n, &text);
        prop_assert_eq!((got.classification, got.entry), oracle_classify(&snap, &text), "text {:?}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,40}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert!(!once.starts_with(' ') && !once.ends_with(' ') && !once.contains("  "));
    }

    #[test]
    fn exact_alias_is_never_irrelevant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let snap = random_snapshot(&mut r);
        let n = Normalizer::default();
        let m = SnapshotMatcher::new(&snap, &n);
        for e in &snap.entries {
            for a in &e.aliases {
                if !n.normalize(a).is_empty() {
                    prop_assert_ne!(m.classify(&n, a).classification, Classification::Irrelevant);
                }
            }
        }
    }

    #[test]
    fn degraded_snapshots_never_yield_correct(seed in any::<u64>()) {
        let mut r = rng(seed);
        let snap = random_snapshot(&mut r);
        let text = random_output(&mut r, &snap);
        let n = Normalizer::default();
        let got = SnapshotMatcher::new(&snap, &n).classify(&n, &text);
        if snap.degraded {
            prop_assert_ne!(got.classification, Classification::Correct);
        }
    }

    #[test]
    fn upper_bound_dominates_average(seed in any::<u64>()) {
        let vs = random_verdicts(&mut rng(seed), "m");
        let (_, ub) = aggregate_upper_bound(&vs).unwrap();
        let avg = aggregate_average(&vs).unwrap();
        prop_assert!(ub.fraction(Classification::Correct) >= avg.fraction(Classification::Correct));
        prop_assert!(ub.fraction(Classification::Irrelevant) <= avg.fraction(Classification::Irrelevant));
        for r in [&ub, &avg] {
            let sum: u64 = Classification::ALL.iter().map(|c| r.counts.get(*c)).sum();
            prop_assert_eq!(sum, r.counts.total());
        }
    }

    #[test]
    fn agreement_ignores_prompt_order(seed in any::<u64>(), perm in Just([0u8, 1, 2]).prop_shuffle()) {
        let vs = random_verdicts(&mut rng(seed), "m");
        let shuffled: Vec<_> = vs
            .iter()
            .cloned()
            .map(|mut v| { v.prompt_index = perm[v.prompt_index as usize]; v })
            .collect();
        prop_assert_eq!(prompt_agreement(&vs).unwrap(), prompt_agreement(&shuffled).unwrap());
    }

    #[test]
    fn harmonic_mean_identities(e in 0.0f64..=1.0, p in 0.0f64..=1.0) {
        let h = harmonic_mean(e, p).unwrap();
        prop_assert!((h - harmonic_mean(p, e).unwrap()).abs() <= 1e-12);
        prop_assert!((harmonic_mean(e, e).unwrap() - e).abs() <= 1e-12);
        prop_assert_eq!(harmonic_mean(0.0, p).unwrap(), 0.0);
        if e > 0.0 && p > 0.0 {
            prop_assert!(e.min(p) - 1e-12 <= h && h <= e.max(p) + 1e-12);
        }
    }

    #[test]
    fn box_stats_ordered_and_match_reference(years in prop::collection::vec(1900i32..2030, 1..60)) {
        let (min, q1, med, q3, max) = box_stats(&years).unwrap();
        prop_assert!(min <= q1 && q1 <= med && med <= q3 && q3 <= max);
        prop_assert_eq!((min, q1, med, q3, max), reference_quartiles(&years));
    }

    #[test]
    fn partial_dates_roundtrip(y in -9999i32..9999, m in 1u32..=12, d in 1u32..=28, prec in 0u8..3) {
        let date = match prec {
            0 => PartialDate::year(y),
            1 => PartialDate { year: y, month: Some(m), day: None },
            _ => PartialDate::ymd(y, m, d).unwrap(),
        };
        prop_assert_eq!(date.to_string().parse::<PartialDate>().unwrap(), date);
    }

    #[test]
    fn snapshots_roundtrip_through_json(seed in any::<u64>()) {
        let snap = random_snapshot(&mut rng(seed));
        let text = snapshot_to_string(&snap).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("case.json");
        std::fs::write(&path, &text).unwrap();
        prop_assert_eq!(tempofact_core::wikidata::load_snapshot(&path).unwrap(), snap);
    }

    #[test]
    fn raw_text_roundtrips(text in "\\PC*|[ \\t\\n\\r]{0,5}") {
        let r = ResponseRecord {
            fact_id: "f".into(),
            prompt_index: 2,
            model_id: "m".into(),
            queried_at: chrono::DateTime::UNIX_EPOCH,
            outcome: ResponseOutcome::Ok { raw_text: text.clone() },
        };
        let back: ResponseRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        prop_assert_eq!(back.raw_text(), Some(text.as_str()));
    }

    #[test]
    fn retrieval_is_stable_top_k(words in prop::collection::vec("[a-e]{1,2}( [a-e]{1,2}){0,3}", 1..12), k_frac in 0.0f64..=1.0) {
        let pool: Vec<Demonstration> = words
            .iter()
            .map(|w| Demonstration { fact_text: w.clone(), question: "q".into(), answer: "a".into() })
            .collect();
        let query = Demonstration { fact_text: "a b c".into(), question: "q".into(), answer: "a".into() };
        let k = (k_frac * pool.len() as f64).floor() as usize;
        let scorer = TokenCosine::default();
        let got = retrieve_context(&query, &pool, k, &scorer).unwrap();
        prop_assert_eq!(got.len(), k);
        let texts: Vec<String> = pool.iter().map(|d| format!("{} q a", d.fact_text)).collect();
        let scores = scorer.scores("a b c q a", &texts).unwrap();
        let mut expected: Vec<usize> = (0..pool.len()).collect();
        // Insertion sort is stable by construction.
        for i in 1..expected.len() {
            let mut j = i;
            while j > 0 && scores[expected[j - 1]] < scores[expected[j]] {
                expected.swap(j - 1, j);
                j -= 1;
            }
        }
        let want: Vec<&Demonstration> = expected[..k].iter().map(|&i| &pool[i]).collect();
        prop_assert_eq!(got.iter().collect::<Vec<_>>(), want);
    }

    #[test]
    fn ike_prompt_ends_with_question(k in 0usize..4, q in "[A-Za-z ]{1,30}\\?") {
        let context: Vec<Demonstration> = (0..k)
            .map(|i| Demonstration { fact_text: format!("Demo fact {i}."), question: format!("Demo q {i}?"), answer: format!("A{i}") })
            .collect();
        let spec = IkePromptSpec { question: q.clone(), new_fact_text: "The new fact.".into(), context };
        let prompt = build_ike_prompt(&spec);
        let expected_last = format!("Question: {q}");
        prop_assert_eq!(prompt.lines().last().unwrap(), expected_last.as_str());
        prop_assert_eq!(prompt.matches("The new fact.").count(), 1);
        prop_assert_eq!(build_ike_prompt(&spec), prompt);
    }

    #[test]
    fn scalability_subsets_nest(seed in any::<u64>(), s in any::<u64>()) {
        let mut r = rng(seed);
        let pre = random_verdicts(&mut r, "m");
        let mut post = random_verdicts(&mut rng(seed ^ 1), "m+e");
        post.retain(|v| pre.iter().any(|p| p.fact_id == v.fact_id));
        let Ok(targets) = tempofact_core::metrics::edit_targets(&pre) else { return Ok(()) };
        // Post verdicts only exist for facts present in both random sets.
        if targets.is_empty() || targets.iter().any(|t| !post.iter().any(|v| &v.fact_id == t)) {
            return Ok(());
        }
        let sizes: Vec<usize> = (1..=targets.len()).collect();
        let a = scalability_series(&pre, &post, &sizes, s).unwrap();
        prop_assert_eq!(&a, &scalability_series(&pre, &post, &sizes, s).unwrap());
        let full = tempofact_core::metrics::evaluate_edits(&pre, &post, "e").unwrap();
        prop_assert_eq!(a.last().unwrap().harmonic_mean, full.harmonic_mean);
    }
}
