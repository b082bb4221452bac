use std::path::PathBuf;

use clap::Args;
use tempofact_core::RunManifest;

use super::Context;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Manifest to check.
    pub manifest: PathBuf,
    /// Directory that relative paths in the manifest are resolved against.
    #[arg(long, default_value = ".")]
    pub base: PathBuf,
}

pub fn run(_ctx: &Context, args: VerifyArgs) -> anyhow::Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    manifest.verify(&args.base)?;
    let n = manifest.registry.iter().count() + manifest.inputs.len() + manifest.outputs.len();
    println!("{}: run {}, {n} files verified", args.manifest.display(), manifest.run_id);
    Ok(())
}
