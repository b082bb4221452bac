//! The `tempofact` command line.
//!
//! Every stage reads and writes schema-versioned files, so stages can be run
//! separately and third-party outputs can be slotted in between them.
//!
//! Exit codes: 0 success, 1 usage error, 2 network or data error,
//! 3 schema or format error, 4 empty result.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
pub mod config;
mod output;

pub use config::CliConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tempofact", version, about = "Validate time-sensitive knowledge of language models against Wikidata")]
pub struct Cli {
    /// TOML file with endpoint, HTTP and normalizer settings.
    #[arg(long, global = true, env = "TEMPOFACT_CONFIG")]
    pub config: Option<PathBuf>,

    /// Seed for every sampled quantity (edit subsets).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Retrieve answer snapshots for every registry fact.
    Fetch(commands::fetch::FetchArgs),
    /// Run every prompt through a model and record the responses.
    Query(commands::query::QueryArgs),
    /// Classify responses against snapshots.
    Judge(commands::judge::JudgeArgs),
    /// Correct/outdated/irrelevant rates per model.
    Report(commands::report::ReportArgs),
    /// Fraction of facts answered identically across the three prompts.
    Agreement(commands::report::AgreementArgs),
    /// Start-year statistics of matched answers per model.
    Interval(commands::report::IntervalArgs),
    /// Efficacy, paraphrase success and their harmonic mean for an editor.
    EditEval(commands::edit::EditEvalArgs),
    /// Build in-context editing prompts.
    Ike(commands::ike::IkeArgs),
    /// Check a registry and flag risky prompt templates.
    Lint(commands::lint::LintArgs),
    /// Re-hash every file recorded in a manifest.
    Verify(commands::verify::VerifyArgs),
}

/// Bad flag values detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Some units of work failed; the rest were written.
#[derive(Debug)]
pub struct PartialFailure(pub String);

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PartialFailure {}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use tempofact_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<PartialFailure>() {
            return EXIT_DATA;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::SchemaVersion { .. } | E::Parse { .. } | E::Validation { .. } | E::Template(_) => EXIT_SCHEMA,
                E::NoDatedMatches { .. } | E::NoEditTargets => EXIT_EMPTY,
                E::SubsetTooLarge { .. } | E::PoolTooSmall { .. } => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

fn hint(code: i32) -> Option<String> {
    (code == EXIT_SCHEMA).then(|| {
        format!(
            "hint: the file is malformed or was written by a different tool version; \
             regenerate it with tempofact {} or pass the intended file",
            tempofact_core::manifest::TOOL_VERSION
        )
    })
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let code = exit_code(&err);
            eprintln!("error: {err:#}");
            if let Some(h) = hint(code) {
                eprintln!("{h}");
            }
            code
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let ctx = commands::Context {
        seed: cli.seed.or(config.seed).unwrap_or(0),
        config,
    };
    match cli.command {
        Command::Fetch(a) => commands::fetch::run(&ctx, a),
        Command::Query(a) => commands::query::run(&ctx, a),
        Command::Judge(a) => commands::judge::run(&ctx, a),
        Command::Report(a) => commands::report::run_report(&ctx, a),
        Command::Agreement(a) => commands::report::run_agreement(&ctx, a),
        Command::Interval(a) => commands::report::run_interval(&ctx, a),
        Command::EditEval(a) => commands::edit::run(&ctx, a),
        Command::Ike(a) => commands::ike::run(&ctx, a),
        Command::Lint(a) => commands::lint::run(&ctx, a),
        Command::Verify(a) => commands::verify::run(&ctx, a),
    }
}
