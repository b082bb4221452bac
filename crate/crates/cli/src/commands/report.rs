use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use tempofact_core::manifest::{compute_run_id, FileHash, RunManifest};
use tempofact_core::metrics::{
    aggregate_average, aggregate_upper_bound, prompt_agreement, temporal_box_stats, AgreementReport, BoxStats,
    FactVerdict,
};
use tempofact_core::{Classification, Fraction, RateMode, RateReport};

use super::Context;
use crate::output;

pub const REPORT_SCHEMA: &str = "tempofact.report/1";
pub const AGREEMENT_SCHEMA: &str = "tempofact.agreement/1";
pub const INTERVAL_SCHEMA: &str = "tempofact.interval/1";

#[derive(Debug, Args)]
pub struct TableOutputs {
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the table as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl TableOutputs {
    /// Writes the manifest next to the JSON output, or the CSV one.
    pub(crate) fn finish(&self, mut manifest: RunManifest) -> anyhow::Result<()> {
        for (role, p) in [("json", &self.json), ("csv", &self.csv)] {
            if let Some(p) = p {
                manifest.outputs.push(FileHash::of(role, p)?);
            }
        }
        if let Some(anchor) = self.json.as_ref().or(self.csv.as_ref()) {
            manifest.save(&output::manifest_path(anchor))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Best classification over the three prompts, per fact.
    Upper,
    /// Every prompt counted separately.
    Average,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// One or more verdict files.
    #[arg(long, required = true, num_args = 1..)]
    pub verdicts: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "upper")]
    pub mode: Mode,
    /// Per-fact upper-bound classifications as CSV (upper mode only).
    #[arg(long)]
    pub per_fact: Option<PathBuf>,
    #[command(flatten)]
    pub outputs: TableOutputs,
}

#[derive(Serialize)]
struct Document<T: Serialize> {
    schema_version: &'static str,
    run_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<RateMode>,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct RateRow {
    model_id: String,
    n_facts: usize,
    correct: Fraction,
    outdated: Fraction,
    irrelevant: Fraction,
    correct_pct: f64,
    outdated_pct: f64,
    irrelevant_pct: f64,
}

#[derive(Serialize)]
struct RateCsv {
    model_id: String,
    mode: &'static str,
    n_facts: usize,
    n_judged: u64,
    correct: u64,
    outdated: u64,
    irrelevant: u64,
    correct_pct: String,
    outdated_pct: String,
    irrelevant_pct: String,
}

#[derive(Serialize)]
struct FactCsv {
    fact_id: String,
    model_id: String,
    prompt_0: char,
    prompt_1: char,
    prompt_2: char,
    upper_bound: char,
}

fn mode_name(mode: RateMode) -> &'static str {
    match mode {
        RateMode::UpperBound => "upper_bound",
        RateMode::Average => "average",
    }
}

pub fn run_report(_ctx: &Context, args: ReportArgs) -> anyhow::Result<()> {
    let (set, inputs) = output::verdicts(&args.verdicts, "verdicts")?;
    let mode = match args.mode {
        Mode::Upper => RateMode::UpperBound,
        Mode::Average => RateMode::Average,
    };
    if args.per_fact.is_some() && mode != RateMode::UpperBound {
        return Err(crate::UsageError("--per-fact needs --mode upper".into()).into());
    }
    let run_id = compute_run_id("report", &[mode_name(mode).to_string()], &output::hashes(&inputs));
    let mut reports: Vec<RateReport> = Vec::new();
    let mut per_fact: Vec<FactVerdict> = Vec::new();
    for model in set.model_ids() {
        let vs: Vec<_> = set.for_model(&model).cloned().collect();
        match mode {
            RateMode::UpperBound => {
                let (facts, r) = aggregate_upper_bound(&vs)?;
                per_fact.extend(facts);
                reports.push(r);
            }
            RateMode::Average => reports.push(aggregate_average(&vs)?),
        }
    }

    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.model_id.clone(), r.n_facts.to_string()];
            row.extend(Classification::ALL.iter().map(|&c| output::pct(r.pct(c))));
            row
        })
        .collect();
    println!("mode: {}", mode_name(mode));
    print!("{}", output::render_table(&["model", "facts", "correct", "outdated", "irrelevant"], &rows));

    if let Some(p) = &args.outputs.json {
        let doc = Document {
            schema_version: REPORT_SCHEMA,
            run_id: run_id.clone(),
            mode: Some(mode),
            rows: reports
                .iter()
                .map(|r| RateRow {
                    model_id: r.model_id.clone(),
                    n_facts: r.n_facts,
                    correct: r.fraction(Classification::Correct),
                    outdated: r.fraction(Classification::Outdated),
                    irrelevant: r.fraction(Classification::Irrelevant),
                    correct_pct: r.pct(Classification::Correct),
                    outdated_pct: r.pct(Classification::Outdated),
                    irrelevant_pct: r.pct(Classification::Irrelevant),
                })
                .collect(),
        };
        output::write_json(p, &doc)?;
    }
    if let Some(p) = &args.outputs.csv {
        let rows: Vec<RateCsv> = reports
            .iter()
            .map(|r| RateCsv {
                model_id: r.model_id.clone(),
                mode: mode_name(mode),
                n_facts: r.n_facts,
                n_judged: r.counts.total(),
                correct: r.counts.correct,
                outdated: r.counts.outdated,
                irrelevant: r.counts.irrelevant,
                correct_pct: format!("{:.2}", r.pct(Classification::Correct)),
                outdated_pct: format!("{:.2}", r.pct(Classification::Outdated)),
                irrelevant_pct: format!("{:.2}", r.pct(Classification::Irrelevant)),
            })
            .collect();
        output::write_csv(p, &rows)?;
    }
    let mut manifest = RunManifest::new("report", &run_id);
    manifest.inputs = inputs;
    if let Some(p) = &args.per_fact {
        let rows: Vec<FactCsv> = per_fact
            .iter()
            .map(|f| FactCsv {
                fact_id: f.fact_id.clone(),
                model_id: f.model_id.clone(),
                prompt_0: f.per_prompt[0].letter(),
                prompt_1: f.per_prompt[1].letter(),
                prompt_2: f.per_prompt[2].letter(),
                upper_bound: f.upper_bound.letter(),
            })
            .collect();
        output::write_csv(p, &rows)?;
        manifest.outputs.push(FileHash::of("per_fact_csv", p)?);
    }
    args.outputs.finish(manifest)
}

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub verdicts: Vec<PathBuf>,
    #[command(flatten)]
    pub outputs: TableOutputs,
}

#[derive(Serialize)]
struct AgreementRow {
    model_id: String,
    n_facts: usize,
    n_agreeing: usize,
    agreement: Fraction,
    agreement_pct: f64,
}

#[derive(Serialize)]
struct AgreementCsv {
    model_id: String,
    n_facts: usize,
    n_agreeing: usize,
    agreement_pct: String,
}

pub fn run_agreement(_ctx: &Context, args: AgreementArgs) -> anyhow::Result<()> {
    let (set, inputs) = output::verdicts(&args.verdicts, "verdicts")?;
    let run_id = compute_run_id("agreement", &[], &output::hashes(&inputs));
    let mut reports: Vec<AgreementReport> = Vec::new();
    for model in set.model_ids() {
        let vs: Vec<_> = set.for_model(&model).cloned().collect();
        reports.push(prompt_agreement(&vs)?);
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.model_id.clone(),
                r.n_facts.to_string(),
                r.n_agreeing.to_string(),
                output::pct(r.fraction().percent()),
            ]
        })
        .collect();
    print!("{}", output::render_table(&["model", "facts", "agreeing", "agreement"], &rows));
    if let Some(p) = &args.outputs.json {
        let doc = Document {
            schema_version: AGREEMENT_SCHEMA,
            run_id: run_id.clone(),
            mode: None,
            rows: reports
                .iter()
                .map(|r| AgreementRow {
                    model_id: r.model_id.clone(),
                    n_facts: r.n_facts,
                    n_agreeing: r.n_agreeing,
                    agreement: r.fraction(),
                    agreement_pct: r.fraction().percent(),
                })
                .collect(),
        };
        output::write_json(p, &doc)?;
    }
    if let Some(p) = &args.outputs.csv {
        let rows: Vec<AgreementCsv> = reports
            .iter()
            .map(|r| AgreementCsv {
                model_id: r.model_id.clone(),
                n_facts: r.n_facts,
                n_agreeing: r.n_agreeing,
                agreement_pct: format!("{:.2}", r.fraction().percent()),
            })
            .collect();
        output::write_csv(p, &rows)?;
    }
    let mut manifest = RunManifest::new("agreement", &run_id);
    manifest.inputs = inputs;
    args.outputs.finish(manifest)
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub verdicts: Vec<PathBuf>,
    /// Box-plot data per model (JSON).
    #[command(flatten)]
    pub outputs: TableOutputs,
}

pub fn run_interval(_ctx: &Context, args: IntervalArgs) -> anyhow::Result<()> {
    let (set, inputs) = output::verdicts(&args.verdicts, "verdicts")?;
    let run_id = compute_run_id("interval", &[], &output::hashes(&inputs));
    let mut stats: Vec<BoxStats> = Vec::new();
    let mut empty = None;
    for model in set.model_ids() {
        let vs: Vec<_> = set.for_model(&model).cloned().collect();
        match temporal_box_stats(&vs) {
            Ok(b) => stats.push(b),
            Err(e @ tempofact_core::Error::NoDatedMatches { .. }) => {
                eprintln!("{model}: {e}");
                empty.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let year = |x: f64| if x.fract() == 0.0 { format!("{x:.0}") } else { format!("{x:.1}") };
    let rows: Vec<Vec<String>> = stats
        .iter()
        .map(|b| {
            vec![
                b.model_id.clone(),
                year(b.min_year),
                year(b.q1),
                year(b.median),
                year(b.q3),
                year(b.max_year),
                b.n_points.to_string(),
                b.skipped_n.to_string(),
            ]
        })
        .collect();
    print!(
        "{}",
        output::render_table(&["model", "min", "q1", "median", "q3", "max", "n", "undated"], &rows)
    );
    if !stats.is_empty() {
        if let Some(p) = &args.outputs.json {
            let doc = Document {
                schema_version: INTERVAL_SCHEMA,
                run_id: run_id.clone(),
                mode: None,
                rows: stats.clone(),
            };
            output::write_json(p, &doc)?;
        }
        if let Some(p) = &args.outputs.csv {
            output::write_csv(p, &stats)?;
        }
        let mut manifest = RunManifest::new("interval", &run_id);
        manifest.inputs = inputs;
        args.outputs.finish(manifest)?;
    }
    match empty {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}
