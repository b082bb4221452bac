use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use tempofact_core::manifest::{compute_run_id, RunManifest};
use tempofact_core::metrics::{evaluate_edits, scalability_series};
use tempofact_core::Fraction;

use super::report::TableOutputs;
use super::Context;
use crate::output;

pub const EDIT_EVAL_SCHEMA: &str = "tempofact.edit_eval/1";

#[derive(Debug, Args)]
pub struct EditEvalArgs {
    /// Verdicts of the unedited model; its outdated facts are the edit targets.
    #[arg(long)]
    pub pre: PathBuf,
    /// Verdicts of the edited model on the same prompts.
    #[arg(long)]
    pub post: PathBuf,
    /// Name of the editing method, for the table.
    #[arg(long)]
    pub editor: String,
    /// Model id in the pre-edit file, if it holds several.
    #[arg(long)]
    pub model: Option<String>,
    /// Model id in the post-edit file, if it holds several.
    #[arg(long)]
    pub post_model: Option<String>,
    /// Also score random target subsets of these sizes (uses --seed).
    #[arg(long, value_delimiter = ',')]
    pub subset_sizes: Vec<usize>,
    #[command(flatten)]
    pub outputs: TableOutputs,
}

#[derive(Serialize)]
struct OutcomeRow {
    model_id: String,
    editor_id: String,
    n_outdated: usize,
    efficacy_success: Fraction,
    paraphrase_success: Fraction,
    harmonic_mean: Fraction,
    efficacy_pct: f64,
    paraphrase_pct: f64,
    harmonic_mean_value: f64,
}

#[derive(Serialize)]
struct PointRow {
    n_edits: usize,
    harmonic_mean: Fraction,
    harmonic_mean_value: f64,
}

#[derive(Serialize)]
struct Document {
    schema_version: &'static str,
    run_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    outcome: OutcomeRow,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    scalability: Vec<PointRow>,
}

#[derive(Serialize)]
struct OutcomeCsv {
    model_id: String,
    editor_id: String,
    n_outdated: usize,
    efficacy_pct: String,
    paraphrase_pct: String,
    harmonic_mean_pct: String,
}

pub fn run(ctx: &Context, args: EditEvalArgs) -> anyhow::Result<()> {
    let (pre_set, mut inputs) = output::verdicts(std::slice::from_ref(&args.pre), "pre_verdicts")?;
    let (post_set, post_inputs) = output::verdicts(std::slice::from_ref(&args.post), "post_verdicts")?;
    inputs.extend(post_inputs);
    let (pre_model, pre) = output::model_verdicts(&pre_set, args.model.as_deref(), "--model")?;
    let (post_model, post) = output::model_verdicts(&post_set, args.post_model.as_deref(), "--post-model")?;

    let seed = (!args.subset_sizes.is_empty()).then_some(ctx.seed);
    let sizes: Vec<String> = args.subset_sizes.iter().map(|n| n.to_string()).collect();
    let run_id = compute_run_id(
        "edit-eval",
        &[
            args.editor.clone(),
            pre_model,
            post_model,
            sizes.join(","),
            seed.map(|s| s.to_string()).unwrap_or_default(),
        ],
        &output::hashes(&inputs),
    );

    let o = evaluate_edits(&pre, &post, &args.editor)?;
    let series = match seed {
        Some(s) => scalability_series(&pre, &post, &args.subset_sizes, s)?,
        None => Vec::new(),
    };

    let row = vec![
        o.model_id.clone(),
        o.editor_id.clone(),
        o.n_outdated.to_string(),
        output::pct(o.efficacy_success.percent()),
        output::pct(o.paraphrase_success.percent()),
        output::pct(o.harmonic_mean.percent()),
    ];
    print!(
        "{}",
        output::render_table(&["model", "editor", "edits", "efficacy", "paraphrase", "hm"], &[row])
    );
    if !series.is_empty() {
        let rows: Vec<Vec<String>> = series
            .iter()
            .map(|p| vec![p.n_edits.to_string(), output::pct(p.harmonic_mean.percent())])
            .collect();
        println!();
        print!("{}", output::render_table(&["edits", "hm"], &rows));
    }

    if let Some(p) = &args.outputs.json {
        let doc = Document {
            schema_version: EDIT_EVAL_SCHEMA,
            run_id: run_id.clone(),
            seed,
            outcome: OutcomeRow {
                model_id: o.model_id.clone(),
                editor_id: o.editor_id.clone(),
                n_outdated: o.n_outdated,
                efficacy_success: o.efficacy_success,
                paraphrase_success: o.paraphrase_success,
                harmonic_mean: o.harmonic_mean,
                efficacy_pct: o.efficacy_success.percent(),
                paraphrase_pct: o.paraphrase_success.percent(),
                harmonic_mean_value: o.harmonic_mean.to_f64(),
            },
            scalability: series
                .iter()
                .map(|p| PointRow {
                    n_edits: p.n_edits,
                    harmonic_mean: p.harmonic_mean,
                    harmonic_mean_value: p.harmonic_mean.to_f64(),
                })
                .collect(),
        };
        output::write_json(p, &doc)?;
    }
    if let Some(p) = &args.outputs.csv {
        output::write_csv(
            p,
            &[OutcomeCsv {
                model_id: o.model_id.clone(),
                editor_id: o.editor_id.clone(),
                n_outdated: o.n_outdated,
                efficacy_pct: format!("{:.2}", o.efficacy_success.percent()),
                paraphrase_pct: format!("{:.2}", o.paraphrase_success.percent()),
                harmonic_mean_pct: format!("{:.2}", o.harmonic_mean.percent()),
            }],
        )?;
    }
    let mut manifest = RunManifest::new("edit-eval", &run_id);
    manifest.seed = seed;
    manifest.inputs = inputs;
    args.outputs.finish(manifest)
}
