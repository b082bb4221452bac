//! Run manifests: which inputs produced which outputs, with content hashes.
//!
//! Manifests carry no wall-clock time. Timestamps are copied from the
//! artifacts themselves (retrieval and query times), so reruns on identical
//! inputs produce byte-identical manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::adapters::ModelEndpointConfig;
use crate::error::{Error, Result};
use crate::io;
use crate::wikidata::{snapshot_to_string, AnswerSnapshot};

pub const MANIFEST_SCHEMA: &str = "tempofact.manifest/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Manifest path recorded for the compiled-in seed registry.
pub const BUILTIN_REGISTRY: &str = "builtin:registry.toml";
/// Manifest path recorded for the compiled-in demonstration pool.
pub const BUILTIN_POOL: &str = "builtin:demonstrations.toml";

impl FileHash {
    pub fn builtin_registry() -> Self {
        FileHash {
            role: "registry".into(),
            path: BUILTIN_REGISTRY.into(),
            sha256: io::sha256_hex(crate::registry::seed_registry_text().as_bytes()),
        }
    }

    pub fn builtin_pool() -> Self {
        FileHash {
            role: "pool".into(),
            path: BUILTIN_POOL.into(),
            sha256: io::sha256_hex(crate::ike::seed_pool_text().as_bytes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub role: String,
    /// As given on the command line.
    pub path: String,
    pub sha256: String,
}

impl FileHash {
    pub fn of(role: impl Into<String>, path: &Path) -> Result<Self> {
        Ok(FileHash {
            role: role.into(),
            path: path.display().to_string(),
            sha256: io::sha256_file(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    pub run_id: String,
    pub command: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<FileHash>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_set_sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub model_configs: Vec<ModelEndpointConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timestamps: BTreeMap<String, DateTime<Utc>>,
}

/// Deterministic id from the command, its arguments and its input hashes.
pub fn compute_run_id(command: &str, args: &[String], input_hashes: &[String]) -> String {
    let mut material = format!("{command}\n");
    for a in args {
        material.push_str(a);
        material.push('\n');
    }
    material.push('\n');
    let mut hashes = input_hashes.to_vec();
    hashes.sort();
    for h in hashes {
        material.push_str(&h);
        material.push('\n');
    }
    io::sha256_hex(material.as_bytes())[..16].to_string()
}

/// Hash of a snapshot set's canonical serialization, independent of file layout.
pub fn snapshot_set_sha256(snapshots: &BTreeMap<String, AnswerSnapshot>) -> Result<String> {
    let mut material = String::new();
    for (id, s) in snapshots {
        material.push_str(id);
        material.push('\t');
        material.push_str(&io::sha256_hex(snapshot_to_string(s)?.as_bytes()));
        material.push('\n');
    }
    Ok(io::sha256_hex(material.as_bytes()))
}

impl RunManifest {
    pub fn new(command: impl Into<String>, run_id: impl Into<String>) -> Self {
        RunManifest {
            schema_version: MANIFEST_SCHEMA.to_string(),
            run_id: run_id.into(),
            command: command.into(),
            tool_version: TOOL_VERSION.to_string(),
            registry: None,
            snapshot_set_sha256: None,
            model_configs: Vec::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timestamps: BTreeMap::new(),
        }
    }

    pub fn to_string_pretty(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::parse("manifest", e))?;
        s.push('\n');
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::atomic_write(path, self.to_string_pretty()?.as_bytes())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse(context, e))?;
        let found = raw
            .get("schema_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::parse(context, "missing schema_version"))?;
        io::check_schema(context, found, MANIFEST_SCHEMA)?;
        serde_json::from_value(raw).map_err(|e| Error::parse(context, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&io::read_text(path)?, &path.display().to_string())
    }

    /// Re-hashes every recorded file. Relative paths resolve against `base`.
    pub fn verify(&self, base: &Path) -> Result<()> {
        let files = self.registry.iter().chain(&self.inputs).chain(&self.outputs);
        for f in files {
            let found = match f.path.as_str() {
                BUILTIN_REGISTRY => FileHash::builtin_registry().sha256,
                BUILTIN_POOL => FileHash::builtin_pool().sha256,
                path => {
                    let p = PathBuf::from(path);
                    io::sha256_file(&if p.is_relative() { base.join(p) } else { p })?
                }
            };
            if found != f.sha256 {
                return Err(Error::HashMismatch {
                    path: f.path.clone(),
                    expected: f.sha256.clone(),
                    found,
                });
            }
        }
        Ok(())
    }
}
