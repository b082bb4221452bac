use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::{DateTime, SubsecRound, Utc};
use clap::Args;
use tempofact_core::manifest::{compute_run_id, snapshot_set_sha256, FileHash, RunManifest};
use tempofact_core::wikidata::{
    fetch_answer_sets, load_snapshot, save_snapshot, snapshot_file_name, FixtureTransport, HttpSparqlTransport,
    SparqlTransport, DEFAULT_ENDPOINT,
};
use tempofact_core::{AnswerSnapshot, FactSpec};

use super::Context;
use crate::output;
use crate::{PartialFailure, UsageError};

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Registry TOML; the built-in seed registry when omitted.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Snapshots go to `<out>/<YYYY-MM-DD>/`.
    #[arg(long, default_value = "snapshots")]
    pub out: PathBuf,
    /// SPARQL endpoint URL.
    #[arg(long, env = "TEMPOFACT_ENDPOINT")]
    pub endpoint: Option<String>,
    /// Read recorded result documents `<dir>/<fact_id>.json` instead of querying.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Retrieval time to record (RFC 3339); defaults to now.
    #[arg(long)]
    pub retrieved_at: Option<DateTime<Utc>>,
    /// Ignore snapshots already present for the day.
    #[arg(long)]
    pub refetch: bool,
    /// Only these fact ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub facts: Vec<String>,
    #[arg(long)]
    pub concurrency: Option<usize>,
    #[arg(long, env = "TEMPOFACT_USER_AGENT")]
    pub user_agent: Option<String>,
}

pub fn run(ctx: &Context, args: FetchArgs) -> anyhow::Result<()> {
    let (registry, registry_hash) = output::registry(args.registry.as_deref())?;
    let facts: Vec<FactSpec> = if args.facts.is_empty() {
        registry.facts.clone()
    } else {
        args.facts
            .iter()
            .map(|id| {
                registry
                    .get(id)
                    .cloned()
                    .ok_or_else(|| UsageError(format!("unknown fact id `{id}`")))
            })
            .collect::<Result<_, _>>()?
    };
    let retrieved_at = args.retrieved_at.unwrap_or_else(Utc::now).trunc_subsecs(0);
    let dir = args.out.join(retrieved_at.format("%Y-%m-%d").to_string());
    std::fs::create_dir_all(&dir).map_err(|e| anyhow::anyhow!("creating {}: {e}", dir.display()))?;

    let settings = &ctx.config.wikidata;
    let transport: Box<dyn SparqlTransport> = match &args.fixtures {
        Some(fx) => {
            if args.endpoint.is_some() {
                log::warn!("--fixtures given, ignoring the endpoint");
            }
            Box::new(FixtureTransport::new(fx))
        }
        None => {
            let endpoint = args
                .endpoint
                .clone()
                .or_else(|| settings.endpoint.clone())
                .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
            let mut policy = settings.http.clone();
            if let Some(ua) = &args.user_agent {
                policy.user_agent = ua.clone();
            }
            Box::new(HttpSparqlTransport::new(endpoint, policy)?)
        }
    };
    let fact_ids: Vec<String> = facts.iter().map(|f| f.fact_id.clone()).collect();
    let run_id = compute_run_id(
        "fetch",
        &[transport.endpoint(), dir.display().to_string(), fact_ids.join(",")],
        &[registry_hash.sha256.clone()],
    );

    let mut snapshots: BTreeMap<String, AnswerSnapshot> = BTreeMap::new();
    let mut pending = Vec::new();
    for fact in &facts {
        let cached = dir.join(snapshot_file_name(&fact.fact_id));
        if !args.refetch && cached.exists() {
            snapshots.insert(fact.fact_id.clone(), load_snapshot(&cached)?);
        } else {
            pending.push(fact.clone());
        }
    }
    log::info!("{} cached, {} to fetch", snapshots.len(), pending.len());
    let concurrency = args.concurrency.unwrap_or(settings.concurrency);
    let mut failures = Vec::new();
    for outcome in fetch_answer_sets(transport.as_ref(), &pending, retrieved_at, concurrency) {
        match outcome.result {
            Ok(s) => {
                snapshots.insert(outcome.fact_id, s);
            }
            Err(e) => failures.push((outcome.fact_id, e)),
        }
    }

    let mut outputs = Vec::new();
    for s in snapshots.values() {
        let path = save_snapshot(&dir, s, Some(&run_id))?;
        outputs.push(FileHash::of("snapshot", &path)?);
    }
    let degraded: Vec<&str> = snapshots.values().filter(|s| s.degraded).map(|s| s.fact_id.as_str()).collect();
    eprintln!("{} snapshots in {} ({} degraded)", snapshots.len(), dir.display(), degraded.len());
    if !degraded.is_empty() {
        eprintln!("degraded: {}", degraded.join(", "));
    }
    if !failures.is_empty() {
        for (id, e) in &failures {
            eprintln!("failed: {id}: {e}");
        }
        return Err(PartialFailure(format!(
            "{} of {} facts could not be fetched; no manifest written",
            failures.len(),
            facts.len()
        ))
        .into());
    }

    let mut manifest = RunManifest::new("fetch", &run_id);
    manifest.registry = Some(registry_hash);
    manifest.snapshot_set_sha256 = Some(snapshot_set_sha256(&snapshots)?);
    if let Some(fx) = &args.fixtures {
        for id in &fact_ids {
            manifest.inputs.push(FileHash::of("fixture", &fx.join(format!("{id}.json")))?);
        }
    }
    manifest.outputs = outputs;
    if let Some(first) = snapshots.values().map(|s| s.retrieved_at).min() {
        manifest.timestamps.insert("retrieved_at_first".into(), first);
    }
    if let Some(last) = snapshots.values().map(|s| s.retrieved_at).max() {
        manifest.timestamps.insert("retrieved_at_last".into(), last);
    }
    manifest.save(&dir.join("manifest.json"))?;
    println!("{}", dir.display());
    Ok(())
}
