use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde::Serialize;
use tempofact_core::io::atomic_write;
use tempofact_core::judge::VerdictSet;
use tempofact_core::manifest::FileHash;
use tempofact_core::registry::{load_registry, seed_registry};
use tempofact_core::{Registry, Verdict};

use crate::UsageError;

/// `out.jsonl` -> `out.jsonl.manifest.json`
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = OsString::from(out.as_os_str());
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn registry(path: Option<&Path>) -> anyhow::Result<(Registry, FileHash)> {
    match path {
        Some(p) => Ok((load_registry(p)?, FileHash::of("registry", p)?)),
        None => Ok((seed_registry(), FileHash::builtin_registry())),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())?;
    Ok(())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().context("flushing csv")?;
    atomic_write(path, &bytes)?;
    Ok(())
}

/// Plain-text table; every column after the first is right-aligned.
pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("  {cell:>w$}"));
            }
        }
        out.trim_end().to_string()
    };
    let mut text = line(headers.to_vec());
    text.push('\n');
    for row in rows {
        text.push_str(&line(row.iter().map(String::as_str).collect()));
        text.push('\n');
    }
    text
}

pub fn pct(x: f64) -> String {
    format!("{x:.1}%")
}

/// Loads and merges verdict files, returning their hashes as manifest inputs.
pub fn verdicts(paths: &[PathBuf], role: &str) -> anyhow::Result<(VerdictSet, Vec<FileHash>)> {
    let mut sets = Vec::new();
    let mut hashes = Vec::new();
    for p in paths {
        sets.push(VerdictSet::load(p)?);
        hashes.push(FileHash::of(role, p)?);
    }
    let run_id = sets.first().map(|s| s.run_id.clone()).unwrap_or_default();
    Ok((VerdictSet::merge(run_id, sets), hashes))
}

/// The verdicts of `model`, or of the only model present when `model` is unset.
pub fn model_verdicts(set: &VerdictSet, model: Option<&str>, flag: &str) -> anyhow::Result<(String, Vec<Verdict>)> {
    let models = set.model_ids();
    let id = match model {
        Some(m) if models.iter().any(|x| x == m) => m.to_string(),
        Some(m) => {
            return Err(UsageError(format!("model `{m}` not found (available: {})", models.join(", "))).into())
        }
        None if models.len() == 1 => models[0].clone(),
        None => {
            return Err(UsageError(format!("several models present, choose one with {flag}: {}", models.join(", "))).into())
        }
    };
    let vs = set.for_model(&id).cloned().collect();
    Ok((id, vs))
}

/// Manifest inputs hashed as content only, for run ids.
pub fn hashes(files: &[FileHash]) -> Vec<String> {
    files.iter().map(|f| f.sha256.clone()).collect()
}
