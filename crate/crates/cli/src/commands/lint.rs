use std::path::PathBuf;

use clap::Args;
use tempofact_core::registry::{lint_templates, FactCategory, LintConfig};

use super::Context;
use crate::output;

#[derive(Debug, Args)]
pub struct LintArgs {
    /// Registry TOML; the built-in seed registry when omitted.
    #[arg(long)]
    pub registry: Option<PathBuf>,
}

pub fn run(_ctx: &Context, args: LintArgs) -> anyhow::Result<()> {
    let (registry, hash) = output::registry(args.registry.as_deref())?;
    registry.validate()?;
    let warnings = lint_templates(&registry, &LintConfig::default());
    for w in &warnings {
        println!("{}[{}]: {}", w.fact_id, w.template_index, w.message);
    }
    println!(
        "{}: {} facts ({} athlete, {} organization, {} country), {} warnings",
        hash.path,
        registry.facts.len(),
        registry.count(FactCategory::Athlete),
        registry.count(FactCategory::Organization),
        registry.count(FactCategory::Country),
        warnings.len()
    );
    Ok(())
}
