use std::path::{Path, PathBuf};

use clap::Args;
use tempofact_core::adapters::ResponseSet;
use tempofact_core::io::sha256_file;
use tempofact_core::judge::{judge_run, Normalizer};
use tempofact_core::manifest::{compute_run_id, snapshot_set_sha256, FileHash, RunManifest};
use tempofact_core::wikidata::load_snapshot_dir;
use tempofact_core::{Classification, Error};

use super::Context;
use crate::output;

#[derive(Debug, Args)]
pub struct JudgeArgs {
    /// One or more response files.
    #[arg(long, required = true, num_args = 1..)]
    pub responses: Vec<PathBuf>,
    /// Snapshot directory written by `fetch`.
    #[arg(long)]
    pub snapshots: PathBuf,
    /// Verdict file to write.
    #[arg(long)]
    pub out: PathBuf,
}

/// Checks the snapshot files listed in `<dir>/manifest.json`, when present.
/// Paths are resolved by file name inside `dir` so the directory can move.
pub fn verify_snapshot_dir(dir: &Path) -> anyhow::Result<()> {
    let manifest_file = dir.join("manifest.json");
    if !manifest_file.exists() {
        log::warn!("{} has no manifest; snapshot hashes not checked", dir.display());
        return Ok(());
    }
    let manifest = RunManifest::load(&manifest_file)?;
    for f in &manifest.outputs {
        let name = Path::new(&f.path).file_name().unwrap_or_default();
        let found = sha256_file(&dir.join(name))?;
        if found != f.sha256 {
            return Err(Error::HashMismatch {
                path: f.path.clone(),
                expected: f.sha256.clone(),
                found,
            }
            .into());
        }
    }
    Ok(())
}

pub fn run(ctx: &Context, args: JudgeArgs) -> anyhow::Result<()> {
    verify_snapshot_dir(&args.snapshots)?;
    let snapshots = load_snapshot_dir(&args.snapshots)?;
    let mut sets = Vec::new();
    let mut inputs = Vec::new();
    for p in &args.responses {
        sets.push(ResponseSet::load(p)?);
        inputs.push(FileHash::of("responses", p)?);
    }
    let set_hash = snapshot_set_sha256(&snapshots)?;
    let normalizer_config = serde_json::to_string(&ctx.config.normalizer)?;
    let mut content = output::hashes(&inputs);
    content.push(set_hash.clone());
    let run_id = compute_run_id("judge", &[normalizer_config], &content);

    let normalizer = Normalizer::new(&ctx.config.normalizer);
    let verdicts = judge_run(&sets, &snapshots, &normalizer, &run_id)?;
    verdicts.save(&args.out)?;

    let mut manifest = RunManifest::new("judge", &run_id);
    manifest.snapshot_set_sha256 = Some(set_hash);
    manifest.inputs = inputs;
    manifest.outputs = vec![FileHash::of("verdicts", &args.out)?];
    manifest.save(&output::manifest_path(&args.out))?;

    for model in verdicts.model_ids() {
        let count = |c| verdicts.for_model(&model).filter(|v| v.classification == c).count();
        eprintln!(
            "{model}: {} correct, {} outdated, {} irrelevant",
            count(Classification::Correct),
            count(Classification::Outdated),
            count(Classification::Irrelevant)
        );
    }
    Ok(())
}
