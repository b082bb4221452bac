#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use support::{MockServer, Reply};
use tempofact_core::judge::{MatchedEntry, VerdictSet};
use tempofact_core::{Classification, PartialDate, ValidityInterval, Verdict};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn tempofact(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempofact"))
        .args(args)
        .current_dir(dir)
        .env_remove("TEMPOFACT_ENDPOINT")
        .env_remove("TEMPOFACT_CONFIG")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fetch_fixtures(dir: &Path) {
    let o = tempofact(
        dir,
        &[
            "fetch",
            "--fixtures",
            fixtures().join("sparql").to_str().unwrap(),
            "--out",
            "snaps",
            "--retrieved-at",
            "2023-12-18T00:00:00Z",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn replay_config(dir: &Path, model: &str, replay: &Path) -> PathBuf {
    let path = dir.join(format!("{model}.toml"));
    std::fs::write(
        &path,
        format!("model_id = \"{model}\"\nkind = \"replay_file\"\nreplay_path = {:?}\n", replay.to_str().unwrap()),
    )
    .unwrap();
    path
}

fn verdict(fact: &str, prompt: u8, model: &str, c: Classification, start: Option<i32>) -> Verdict {
    Verdict {
        fact_id: fact.into(),
        prompt_index: prompt,
        model_id: model.into(),
        classification: c,
        matched: (c != Classification::Irrelevant).then(|| MatchedEntry {
            canonical_label: "x".into(),
            entity_qid: None,
            interval: ValidityInterval::new(start.map(PartialDate::year), None).unwrap(),
        }),
        normalized_text: "x".into(),
        from_error: false,
    }
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tempofact(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&tempofact(dir.path(), &["report"])), 1);
    assert_eq!(code(&tempofact(dir.path(), &["--help"])), 0);
}

#[test]
fn foreign_schema_exits_three_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("v.jsonl"), "{\"schema_version\":\"tempofact.verdicts/9\",\"run_id\":\"r\"}\n").unwrap();
    let o = tempofact(dir.path(), &["report", "--verdicts", "v.jsonl"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("hint:"), "{}", stderr(&o));
}

#[test]
fn interval_without_dated_matches_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let vs = (0..3).map(|p| verdict("f", p, "m", Classification::Irrelevant, None)).collect();
    VerdictSet::new("r", vs).save(&dir.path().join("v.jsonl")).unwrap();
    let o = tempofact(dir.path(), &["interval", "--verdicts", "v.jsonl", "--json", "i.json"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(!dir.path().join("i.json").exists());
}

#[test]
fn all_targets_corrected_gives_unit_harmonic_mean() {
    use Classification::*;
    let dir = tempfile::tempdir().unwrap();
    let mut pre = Vec::new();
    let mut post = Vec::new();
    for f in ["a", "b", "c"] {
        for p in 0..3 {
            pre.push(verdict(f, p, "m", Outdated, Some(2010)));
            post.push(verdict(f, p, "m+e", Correct, Some(2020)));
        }
    }
    VerdictSet::new("pre", pre).save(&dir.path().join("pre.jsonl")).unwrap();
    VerdictSet::new("post", post).save(&dir.path().join("post.jsonl")).unwrap();
    let o = tempofact(
        dir.path(),
        &["edit-eval", "--pre", "pre.jsonl", "--post", "post.jsonl", "--editor", "e", "--json", "e.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(doc["outcome"]["harmonic_mean_value"], 1.0);
    assert_eq!(doc["outcome"]["n_outdated"], 3);
}

#[test]
fn oversized_subset_is_a_usage_error() {
    use Classification::*;
    let dir = tempfile::tempdir().unwrap();
    let pre: Vec<_> = (0..3).map(|p| verdict("a", p, "m", Outdated, Some(2010))).collect();
    let post: Vec<_> = (0..3).map(|p| verdict("a", p, "m+e", Correct, Some(2020))).collect();
    VerdictSet::new("pre", pre).save(&dir.path().join("pre.jsonl")).unwrap();
    VerdictSet::new("post", post).save(&dir.path().join("post.jsonl")).unwrap();
    let o = tempofact(
        dir.path(),
        &["edit-eval", "--pre", "pre.jsonl", "--post", "post.jsonl", "--editor", "e", "--subset-sizes", "2"],
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn unreachable_endpoint_exits_two_without_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "[wikidata.http]\nmax_retries = 0\ntimeout_secs = 2\nmin_interval_ms = 0\n",
    )
    .unwrap();
    let o = tempofact(
        dir.path(),
        &[
            "--config",
            "cfg.toml",
            "fetch",
            "--endpoint",
            "http://127.0.0.1:9/sparql",
            "--facts",
            "ronaldo_club",
            "--out",
            "snaps",
            "--retrieved-at",
            "2023-12-18T00:00:00Z",
        ],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(!dir.path().join("snaps/2023-12-18/manifest.json").exists());
}

#[test]
fn cached_refetch_reads_nothing_and_reproduces_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("sparql");
    std::fs::create_dir(&fx).unwrap();
    for e in std::fs::read_dir(fixtures().join("sparql")).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), fx.join(e.file_name())).unwrap();
    }
    let args = ["fetch", "--fixtures", "sparql", "--out", "snaps", "--retrieved-at", "2023-12-18T00:00:00Z"];
    assert_eq!(code(&tempofact(dir.path(), &args)), 0);
    let manifest = dir.path().join("snaps/2023-12-18/manifest.json");
    let first = std::fs::read(&manifest).unwrap();
    // With the recorded documents gone, only the cache can satisfy the rerun.
    for e in std::fs::read_dir(&fx).unwrap() {
        std::fs::write(e.unwrap().path(), "not json").unwrap();
    }
    let o = tempofact(dir.path(), &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let snapshot_hashes = |m: &[u8]| {
        let v: serde_json::Value = serde_json::from_slice(m).unwrap();
        (v["snapshot_set_sha256"].clone(), v["outputs"].clone())
    };
    assert_eq!(snapshot_hashes(&first), snapshot_hashes(&std::fs::read(&manifest).unwrap()));
    let o = tempofact(dir.path(), &[&args[..], &["--refetch"]].concat());
    assert_eq!(code(&o), 2, "refetch must hit the broken fixtures");
}

fn chat_reply(_: usize, _: &support::Seen) -> Reply {
    Reply::new(200, r#"{"choices":[{"message":{"content":"Al-Nassr"}}]}"#)
}

fn chat_config(dir: &Path, url: &str, token_env: &str) -> PathBuf {
    let path = dir.join("chat.toml");
    std::fs::write(
        &path,
        format!(
            "model_id = \"chat\"\nkind = \"chat_http\"\nbase_url = \"{url}\"\nauth_token_env = \"{token_env}\"\n\
             concurrency = 8\n[http]\nmin_interval_ms = 0\nmax_retries = 0\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn missing_token_fails_before_any_request() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start_with(chat_reply);
    let cfg = chat_config(dir.path(), &server.url, "TEMPOFACT_TEST_TOKEN_THAT_IS_UNSET");
    let o = tempofact(dir.path(), &["query", "--model", cfg.to_str().unwrap(), "--out", "r.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("authentication"), "{}", stderr(&o));
    assert!(server.requests().is_empty());
}

#[test]
fn resume_of_complete_run_sends_no_requests() {
    let dir = tempfile::tempdir().unwrap();
    let server = MockServer::start_with(chat_reply);
    let cfg = chat_config(dir.path(), &server.url, "TEMPOFACT_TEST_TOKEN");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_tempofact"))
            .args([&["query", "--model", cfg.to_str().unwrap(), "--out", "r.jsonl"][..], extra].concat())
            .current_dir(dir.path())
            .env("TEMPOFACT_TEST_TOKEN", "secret")
            .output()
            .unwrap()
    };
    let o = run(&[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(server.requests().len(), 390);
    let first = std::fs::read(dir.path().join("r.jsonl")).unwrap();
    let o = run(&["--resume"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(server.requests().len(), 390);
    assert_eq!(std::fs::read(dir.path().join("r.jsonl")).unwrap(), first);
    assert!(!dir.path().join("r.jsonl.partial").exists());
}

#[test]
fn failed_prompts_exit_two_and_resume_retries_only_them() {
    let dir = tempfile::tempdir().unwrap();
    let full = std::fs::read_to_string(fixtures().join("replay/toy-2019.jsonl")).unwrap();
    let holey: Vec<&str> = full
        .lines()
        .filter(|l| !(l.contains("\"ronaldo_club\"") && l.contains("\"prompt_index\": 1")))
        .collect();
    let replay = dir.path().join("replay.jsonl");
    std::fs::write(&replay, holey.join("\n")).unwrap();
    let cfg = replay_config(dir.path(), "toy-2019", &replay);
    let args = ["query", "--model", cfg.to_str().unwrap(), "--out", "r.jsonl"];
    let o = tempofact(dir.path(), &args);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let set = tempofact_core::ResponseSet::load(&dir.path().join("r.jsonl")).unwrap();
    assert_eq!((set.records.len(), set.error_count()), (390, 1));

    std::fs::write(&replay, &full).unwrap();
    let o = tempofact(dir.path(), &[&args[..], &["--resume"]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let set = tempofact_core::ResponseSet::load(&dir.path().join("r.jsonl")).unwrap();
    assert_eq!(set.error_count(), 0);
}

#[test]
fn mutated_inputs_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    fetch_fixtures(dir.path());
    let cfg = replay_config(dir.path(), "toy-2019", &fixtures().join("replay/toy-2019.jsonl"));
    assert_eq!(code(&tempofact(dir.path(), &["query", "--model", cfg.to_str().unwrap(), "--out", "r.jsonl"])), 0);
    let judge = ["judge", "--responses", "r.jsonl", "--snapshots", "snaps/2023-12-18", "--out", "v.jsonl"];
    assert_eq!(code(&tempofact(dir.path(), &judge)), 0);
    assert_eq!(code(&tempofact(dir.path(), &["verify", "v.jsonl.manifest.json"])), 0);

    let responses = dir.path().join("r.jsonl");
    let text = std::fs::read_to_string(&responses).unwrap();
    let mutated = text.replacen("\"raw_text\":\"", "\"raw_text\":\"Al-Hilal ", 1);
    assert_ne!(mutated, text);
    std::fs::write(&responses, mutated).unwrap();
    let o = tempofact(dir.path(), &["verify", "v.jsonl.manifest.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hash mismatch"), "{}", stderr(&o));

    let snap = dir.path().join("snaps/2023-12-18/ronaldo_club.json");
    let text = std::fs::read_to_string(&snap).unwrap();
    let mutated = text.replace("Al-Nassr", "Al Nassr");
    assert_ne!(mutated, text);
    std::fs::write(&snap, mutated).unwrap();
    let o = tempofact(dir.path(), &judge);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hash mismatch"), "{}", stderr(&o));
}

#[test]
fn artifacts_carry_the_manifest_run_id() {
    let dir = tempfile::tempdir().unwrap();
    fetch_fixtures(dir.path());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("snaps/2023-12-18/manifest.json")).unwrap()).unwrap();
    let snap: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("snaps/2023-12-18/ronaldo_club.json")).unwrap()).unwrap();
    assert_eq!(snap["run_id"], manifest["run_id"]);

    let cfg = replay_config(dir.path(), "toy-2019", &fixtures().join("replay/toy-2019.jsonl"));
    assert_eq!(code(&tempofact(dir.path(), &["query", "--model", cfg.to_str().unwrap(), "--out", "r.jsonl"])), 0);
    let header: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap().lines().next().unwrap()).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.jsonl.manifest.json")).unwrap()).unwrap();
    assert_eq!(header["run_id"], manifest["run_id"]);
}

#[test]
fn lint_reports_seed_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = tempofact(dir.path(), &["lint"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("130 facts (28 athlete, 24 organization, 78 country), 0 warnings"), "{out}");
}
