use std::path::PathBuf;

use clap::Args;
use tempofact_core::adapters::save_prompts;
use tempofact_core::ike::{ike_jobs, load_pool, seed_pool, EmbeddingScorer, SimilarityScorer, TokenCosine};
use tempofact_core::judge::Normalizer;
use tempofact_core::manifest::{compute_run_id, snapshot_set_sha256, FileHash, RunManifest};
use tempofact_core::metrics::edit_targets;
use tempofact_core::wikidata::load_snapshot_dir;

use super::judge::verify_snapshot_dir;
use super::Context;
use crate::output;
use crate::UsageError;

#[derive(Debug, Args)]
pub struct IkeArgs {
    /// Registry TOML; the built-in seed registry when omitted.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Snapshot directory; the new fact is each snapshot's current answer.
    #[arg(long)]
    pub snapshots: PathBuf,
    /// Demonstration pool TOML; the built-in pool when omitted.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Demonstrations per prompt.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Facts to edit (comma separated).
    #[arg(long, value_delimiter = ',', conflicts_with = "targets")]
    pub facts: Vec<String>,
    /// Pre-edit verdicts; their outdated facts become the edit targets.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Model id in the --targets file, if it holds several.
    #[arg(long, requires = "targets")]
    pub model: Option<String>,
    /// Prompt file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Score demonstrations with an OpenAI-style embeddings endpoint.
    #[arg(long, env = "TEMPOFACT_EMBEDDINGS_URL")]
    pub embeddings_url: Option<String>,
    #[arg(long, requires = "embeddings_url", default_value = "text-embedding-3-small")]
    pub embeddings_model: String,
    /// Environment variable holding the embeddings bearer token.
    #[arg(long, requires = "embeddings_url")]
    pub embeddings_token_env: Option<String>,
}

pub fn run(ctx: &Context, args: IkeArgs) -> anyhow::Result<()> {
    let (registry, registry_hash) = output::registry(args.registry.as_deref())?;
    verify_snapshot_dir(&args.snapshots)?;
    let snapshots = load_snapshot_dir(&args.snapshots)?;
    let (pool, pool_hash) = match &args.pool {
        Some(p) => (load_pool(p)?, FileHash::of("pool", p)?),
        None => (seed_pool(), FileHash::builtin_pool()),
    };
    let mut inputs = vec![pool_hash];
    let fact_ids: Vec<String> = if let Some(t) = &args.targets {
        let (set, hashes) = output::verdicts(std::slice::from_ref(t), "pre_verdicts")?;
        inputs.extend(hashes);
        let (_, pre) = output::model_verdicts(&set, args.model.as_deref(), "--model")?;
        edit_targets(&pre)?
    } else if !args.facts.is_empty() {
        for id in &args.facts {
            if registry.get(id).is_none() {
                return Err(UsageError(format!("unknown fact id `{id}`")).into());
            }
        }
        args.facts.clone()
    } else {
        registry.facts.iter().map(|f| f.fact_id.clone()).collect()
    };

    let scorer: Box<dyn SimilarityScorer> = match &args.embeddings_url {
        Some(url) => {
            let token = match &args.embeddings_token_env {
                Some(var) => Some(std::env::var(var).map_err(|_| {
                    tempofact_core::Error::Auth(format!("environment variable {var} is not set"))
                })?),
                None => None,
            };
            Box::new(EmbeddingScorer::new(
                url,
                args.embeddings_model.clone(),
                token,
                ctx.config.wikidata.http.clone(),
            )?)
        }
        None => Box::new(TokenCosine::new(Normalizer::new(&ctx.config.normalizer))),
    };
    let scorer_name = match &args.embeddings_url {
        Some(url) => format!("embeddings:{url}:{}", args.embeddings_model),
        None => "token_cosine".to_string(),
    };

    let set_hash = snapshot_set_sha256(&snapshots)?;
    let mut content = output::hashes(&inputs);
    content.push(registry_hash.sha256.clone());
    content.push(set_hash.clone());
    let run_id = compute_run_id(
        "ike",
        &[args.k.to_string(), fact_ids.join(","), scorer_name],
        &content,
    );
    let jobs = ike_jobs(&registry, &snapshots, &fact_ids, &pool, args.k, scorer.as_ref())?;
    save_prompts(&args.out, &jobs, Some(&run_id))?;

    let mut manifest = RunManifest::new("ike", &run_id);
    manifest.registry = Some(registry_hash);
    manifest.snapshot_set_sha256 = Some(set_hash);
    manifest.inputs = inputs;
    manifest.outputs = vec![FileHash::of("prompts", &args.out)?];
    manifest.save(&output::manifest_path(&args.out))?;
    eprintln!("{} prompts for {} facts", jobs.len(), fact_ids.len());
    Ok(())
}
