use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AnswerSnapshot;
use crate::error::{Error, Result};
use crate::io;

pub const SNAPSHOT_SCHEMA: &str = "tempofact.snapshot/1";

#[derive(Serialize)]
struct SnapshotFileRef<'a> {
    schema_version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    run_id: Option<&'a str>,
    #[serde(flatten)]
    snapshot: &'a AnswerSnapshot,
}

#[derive(Deserialize)]
struct SnapshotFile {
    schema_version: String,
    #[serde(default)]
    #[allow(dead_code)]
    run_id: Option<String>,
    #[serde(flatten)]
    snapshot: AnswerSnapshot,
}

pub fn snapshot_file_name(fact_id: &str) -> String {
    format!("{fact_id}.json")
}

/// Canonical serialization, without a run id. Set hashes are taken over this.
pub fn snapshot_to_string(snapshot: &AnswerSnapshot) -> Result<String> {
    snapshot_file_string(snapshot, None)
}

/// File contents for a snapshot written as part of the run `run_id`.
pub fn snapshot_file_string(snapshot: &AnswerSnapshot, run_id: Option<&str>) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&SnapshotFileRef {
        schema_version: SNAPSHOT_SCHEMA,
        run_id,
        snapshot,
    })
    .map_err(|e| Error::parse("snapshot", e))?;
    text.push('\n');
    Ok(text)
}

pub fn save_snapshot(dir: &Path, snapshot: &AnswerSnapshot, run_id: Option<&str>) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(&snapshot.fact_id));
    io::atomic_write(&path, snapshot_file_string(snapshot, run_id)?.as_bytes())?;
    Ok(path)
}

pub(crate) fn parse_snapshot(text: &str, context: &str) -> Result<AnswerSnapshot> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse(context, e))?;
    let found = raw
        .get("schema_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::parse(context, "missing schema_version"))?;
    io::check_schema(context, found, SNAPSHOT_SCHEMA)?;
    let file: SnapshotFile = serde_json::from_value(raw).map_err(|e| Error::parse(context, e))?;
    debug_assert_eq!(file.schema_version, SNAPSHOT_SCHEMA);
    file.snapshot.validate()?;
    Ok(file.snapshot)
}

pub fn load_snapshot(path: &Path) -> Result<AnswerSnapshot> {
    parse_snapshot(&io::read_text(path)?, &path.display().to_string())
}

/// Loads every `*.json` snapshot in `dir` except `manifest.json`, keyed by fact id.
pub fn load_snapshot_dir(dir: &Path) -> Result<BTreeMap<String, AnswerSnapshot>> {
    let mut out = BTreeMap::new();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json")
                && p.file_name().is_some_and(|n| n != "manifest.json")
        })
        .collect();
    paths.sort();
    for path in paths {
        let snap = load_snapshot(&path)?;
        out.insert(snap.fact_id.clone(), snap);
    }
    Ok(out)
}
