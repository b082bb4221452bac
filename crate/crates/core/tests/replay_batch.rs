use std::path::{Path, PathBuf};

use tempofact_core::adapters::{
    partial_path, registry_jobs, run_batch, BatchOptions, ModelAdapter, ReplayAdapter, ResponseSet,
};
use tempofact_core::registry::seed_registry;
use tempofact_core::Error;

fn replay_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/replay").join(name)
}

#[test]
fn full_replay_covers_every_prompt() {
    let reg = seed_registry();
    let jobs = registry_jobs(&reg, None).unwrap();
    let adapter = ReplayAdapter::load("toy-2019", &replay_path("toy-2019.jsonl")).unwrap();
    let recs = run_batch(&adapter, &jobs, BatchOptions { concurrency: 4, ..Default::default() }).unwrap();
    assert_eq!(recs.len(), 390);
    assert!(recs.iter().all(|r| r.is_ok()));
}

#[test]
fn one_missing_key_yields_one_error_record() {
    let text = std::fs::read_to_string(replay_path("toy-2019.jsonl")).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !(l.contains("\"ronaldo_club\"") && l.contains("\"prompt_index\": 1")))
        .collect();
    assert_eq!(kept.len(), 389);
    let adapter = ReplayAdapter::parse("toy", &kept.join("\n"), "t").unwrap();
    let jobs = registry_jobs(&seed_registry(), None).unwrap();
    let recs = run_batch(&adapter, &jobs, BatchOptions { concurrency: 3, ..Default::default() }).unwrap();
    assert_eq!(recs.len(), 390);
    let errors: Vec<_> = recs.iter().filter(|r| !r.is_ok()).collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].key(), ("ronaldo_club", 1));
}

#[test]
fn raw_text_survives_save_and_load_byte_for_byte() {
    let reg = seed_registry();
    let jobs = registry_jobs(&reg, None).unwrap();
    let adapter = ReplayAdapter::load("toy-2019", &replay_path("toy-2019.jsonl")).unwrap();
    let recs = run_batch(&adapter, &jobs, BatchOptions::default()).unwrap();
    let set = ResponseSet { model_id: "toy-2019".into(), run_id: "r".into(), records: recs };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("responses.jsonl");
    set.save(&out).unwrap();
    let back = ResponseSet::load(&out).unwrap();
    assert_eq!(back, set);
    for (job, rec) in jobs.iter().zip(&back.records) {
        assert_eq!(rec.raw_text().unwrap(), adapter.complete(job).unwrap().raw_text);
    }
    assert!(back.records.iter().any(|r| r.raw_text().unwrap().ends_with('\n')));
}

#[test]
fn resume_of_complete_run_queries_nothing() {
    struct Refuse;
    impl ModelAdapter for Refuse {
        fn model_id(&self) -> &str {
            "toy-2019"
        }
        fn complete(&self, _: &tempofact_core::PromptJob) -> tempofact_core::Result<tempofact_core::adapters::ModelOutput> {
            panic!("no query expected on resume");
        }
    }
    let reg = seed_registry();
    let jobs = registry_jobs(&reg, None).unwrap();
    let adapter = ReplayAdapter::load("toy-2019", &replay_path("toy-2019.jsonl")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let partial = partial_path(&dir.path().join("r.jsonl"));
    let first = run_batch(&adapter, &jobs, BatchOptions { concurrency: 2, partial: Some(partial.clone()), prior: vec![] }).unwrap();
    let again = run_batch(&Refuse, &jobs, BatchOptions { concurrency: 2, partial: Some(partial), prior: vec![] }).unwrap();
    assert_eq!(first, again);
}

#[test]
fn response_file_with_foreign_schema_is_rejected() {
    let text = "{\"schema_version\":\"tempofact.responses/7\",\"model_id\":\"m\",\"run_id\":\"r\"}\n";
    assert!(matches!(ResponseSet::parse(text, "t"), Err(Error::SchemaVersion { .. })));
}
