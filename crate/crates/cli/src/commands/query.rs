use std::path::PathBuf;

use clap::Args;
use tempofact_core::adapters::{
    build_adapter, load_model_config, load_prompts, partial_path, registry_jobs, run_batch, AdapterKind,
    BatchOptions, ResponseSet,
};
use tempofact_core::manifest::{compute_run_id, FileHash, RunManifest};

use super::Context;
use crate::output;
use crate::{PartialFailure, UsageError};

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Registry TOML; the built-in seed registry when omitted.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Model endpoint config (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Prebuilt prompt file (e.g. from `ike`) instead of the registry prompts.
    #[arg(long, conflicts_with = "registry")]
    pub prompts: Option<PathBuf>,
    /// Response file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep successful records from an earlier or interrupted run of the same output.
    #[arg(long)]
    pub resume: bool,
    #[arg(long)]
    pub concurrency: Option<usize>,
}

pub fn run(_ctx: &Context, args: QueryArgs) -> anyhow::Result<()> {
    let config = load_model_config(&args.model)?;
    let mut inputs = vec![FileHash::of("model_config", &args.model)?];
    if config.kind == AdapterKind::ReplayFile {
        if let Some(p) = &config.replay_path {
            inputs.push(FileHash::of("replay", p)?);
        }
    }
    let (jobs, registry_hash) = match &args.prompts {
        Some(p) => {
            inputs.push(FileHash::of("prompts", p)?);
            (load_prompts(p)?, None)
        }
        None => {
            let (reg, hash) = output::registry(args.registry.as_deref())?;
            (registry_jobs(&reg, config.instruction_prefix.as_deref())?, Some(hash))
        }
    };
    let adapter = build_adapter(&config)?;

    let mut content = output::hashes(&inputs);
    content.extend(registry_hash.iter().map(|h| h.sha256.clone()));
    let run_id = compute_run_id("query", &[config.model_id.clone()], &content);

    let partial = partial_path(&args.out);
    let mut prior = Vec::new();
    if args.resume {
        if args.out.exists() {
            let previous = ResponseSet::load(&args.out)?;
            if previous.model_id != config.model_id {
                return Err(UsageError(format!(
                    "{} holds responses of `{}`, not `{}`",
                    args.out.display(),
                    previous.model_id,
                    config.model_id
                ))
                .into());
            }
            prior = previous.records;
        }
    } else if partial.exists() {
        std::fs::remove_file(&partial).map_err(|e| anyhow::anyhow!("removing {}: {e}", partial.display()))?;
    }
    let concurrency = args.concurrency.unwrap_or(config.concurrency);
    let records = run_batch(
        adapter.as_ref(),
        &jobs,
        BatchOptions {
            concurrency,
            partial: Some(partial.clone()),
            prior,
        },
    )?;
    let set = ResponseSet {
        model_id: config.model_id.clone(),
        run_id: run_id.clone(),
        records,
    };
    set.save(&args.out)?;
    if partial.exists() {
        std::fs::remove_file(&partial).map_err(|e| anyhow::anyhow!("removing {}: {e}", partial.display()))?;
    }

    let mut manifest = RunManifest::new("query", &run_id);
    manifest.registry = registry_hash;
    manifest.model_configs = vec![config];
    manifest.inputs = inputs;
    manifest.outputs = vec![FileHash::of("responses", &args.out)?];
    if let Some(t) = set.records.iter().map(|r| r.queried_at).min() {
        manifest.timestamps.insert("queried_at_first".into(), t);
    }
    if let Some(t) = set.records.iter().map(|r| r.queried_at).max() {
        manifest.timestamps.insert("queried_at_last".into(), t);
    }
    manifest.save(&output::manifest_path(&args.out))?;

    let errors = set.error_count();
    eprintln!("{}: {} responses, {} errors", set.model_id, set.records.len(), errors);
    if errors > 0 {
        return Err(PartialFailure(format!(
            "{errors} prompts failed; rerun with --resume to retry them"
        ))
        .into());
    }
    Ok(())
}
