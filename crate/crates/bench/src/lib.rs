//! Inputs shared by the benchmarks, built from the core crate's recorded fixtures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempofact_core::adapters::{registry_jobs, run_batch, BatchOptions, ReplayAdapter};
use tempofact_core::judge::{judge_run, Normalizer};
use tempofact_core::registry::seed_registry;
use tempofact_core::wikidata::{fetch_answer_sets, FixtureTransport};
use tempofact_core::{AnswerSnapshot, ResponseSet, Verdict};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// One snapshot per seed fact, from the recorded SPARQL documents.
pub fn seed_snapshots() -> BTreeMap<String, AnswerSnapshot> {
    let at = Utc.with_ymd_and_hms(2023, 12, 18, 0, 0, 0).unwrap();
    fetch_answer_sets(&FixtureTransport::new(fixtures_dir().join("sparql")), &seed_registry().facts, at, 4)
        .into_iter()
        .map(|o| (o.fact_id, o.result.expect("fixture parses")))
        .collect()
}

/// All 390 recorded responses of the `toy-2019` replay model.
pub fn toy_responses() -> ResponseSet {
    let adapter = ReplayAdapter::load("toy-2019", &fixtures_dir().join("replay/toy-2019.jsonl")).expect("replay");
    let jobs = registry_jobs(&seed_registry(), None).expect("jobs");
    let records = run_batch(&adapter, &jobs, BatchOptions::default()).expect("batch");
    ResponseSet {
        model_id: "toy-2019".into(),
        run_id: "bench".into(),
        records,
    }
}

pub fn toy_verdicts() -> Vec<Verdict> {
    judge_run(&[toy_responses()], &seed_snapshots(), &Normalizer::default(), "bench")
        .expect("judge")
        .verdicts
}

pub fn random_years(n: usize, seed: u64) -> Vec<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(1950..=2023)).collect()
}
