//! Querying language models with the registry prompts.
//!
//! An adapter turns one [`PromptJob`] into raw model text. Three kinds exist:
//! OpenAI-style chat and completion endpoints over HTTP, and a replay adapter
//! serving recorded outputs from a JSONL file. Every model is queried
//! greedily (temperature 0) and its raw text is stored untouched.

mod batch;
mod config;
mod remote;
mod replay;

use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::registry::Registry;

pub use batch::{merge_records, partial_path, run_batch, BatchOptions};
pub use config::{load_model_config, AdapterKind, ModelEndpointConfig, SamplingParams};
pub use remote::{ChatAdapter, CompletionAdapter};
pub use replay::{ReplayAdapter, ReplayLine};

pub const RESPONSES_SCHEMA: &str = "tempofact.responses/1";
pub const PROMPTS_SCHEMA: &str = "tempofact.prompts/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptJob {
    pub fact_id: String,
    pub prompt_index: u8,
    pub prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelOutput {
    pub raw_text: String,
    pub queried_at: DateTime<Utc>,
}

pub trait ModelAdapter: Sync {
    fn model_id(&self) -> &str;
    fn complete(&self, job: &PromptJob) -> Result<ModelOutput>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ResponseOutcome {
    Ok { raw_text: String },
    Error { error: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub fact_id: String,
    pub prompt_index: u8,
    pub model_id: String,
    pub queried_at: DateTime<Utc>,
    #[serde(flatten)]
    pub outcome: ResponseOutcome,
}

impl ResponseRecord {
    pub fn raw_text(&self) -> Option<&str> {
        match &self.outcome {
            ResponseOutcome::Ok { raw_text } => Some(raw_text),
            ResponseOutcome::Error { .. } => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, ResponseOutcome::Ok { .. })
    }

    pub fn key(&self) -> (&str, u8) {
        (&self.fact_id, self.prompt_index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseSetHeader {
    pub schema_version: String,
    pub model_id: String,
    pub run_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseSet {
    pub model_id: String,
    pub run_id: String,
    pub records: Vec<ResponseRecord>,
}

impl ResponseSet {
    pub fn error_count(&self) -> usize {
        self.records.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        io::to_jsonl(
            &ResponseSetHeader {
                schema_version: RESPONSES_SCHEMA.to_string(),
                model_id: self.model_id.clone(),
                run_id: self.run_id.clone(),
            },
            &self.records,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::atomic_write(path, self.to_jsonl()?.as_bytes())
    }

    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let (header, records): (ResponseSetHeader, Vec<ResponseRecord>) =
            io::parse_jsonl(text, context, RESPONSES_SCHEMA)?;
        if let Some(r) = records.iter().find(|r| r.model_id != header.model_id) {
            return Err(Error::parse(
                context,
                format!(
                    "record for `{}` has model `{}`, header says `{}`",
                    r.fact_id, r.model_id, header.model_id
                ),
            ));
        }
        Ok(ResponseSet {
            model_id: header.model_id,
            run_id: header.run_id,
            records,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&io::read_text(path)?, &path.display().to_string())
    }
}

/// One job per `(fact, prompt)` pair, in registry order.
pub fn registry_jobs(registry: &Registry, instruction_prefix: Option<&str>) -> Result<Vec<PromptJob>> {
    let mut jobs = Vec::with_capacity(registry.facts.len() * 3);
    for fact in &registry.facts {
        for (i, prompt) in crate::registry::render_prompts(fact, instruction_prefix)?
            .into_iter()
            .enumerate()
        {
            jobs.push(PromptJob {
                fact_id: fact.fact_id.clone(),
                prompt_index: i as u8,
                prompt,
            });
        }
    }
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PromptFileHeader {
    schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run_id: Option<String>,
}

pub fn prompts_to_jsonl(jobs: &[PromptJob], run_id: Option<&str>) -> Result<String> {
    io::to_jsonl(
        &PromptFileHeader {
            schema_version: PROMPTS_SCHEMA.to_string(),
            run_id: run_id.map(str::to_string),
        },
        jobs,
    )
}

pub fn save_prompts(path: &Path, jobs: &[PromptJob], run_id: Option<&str>) -> Result<()> {
    io::atomic_write(path, prompts_to_jsonl(jobs, run_id)?.as_bytes())
}

pub fn load_prompts(path: &Path) -> Result<Vec<PromptJob>> {
    let (_, jobs): (PromptFileHeader, Vec<PromptJob>) = io::read_jsonl(path, PROMPTS_SCHEMA)?;
    Ok(jobs)
}

/// Builds the adapter described by `config`. HTTP adapters fail here with an
/// auth error when the configured token variable is unset.
pub fn build_adapter(config: &ModelEndpointConfig) -> Result<Box<dyn ModelAdapter>> {
    config.validate()?;
    Ok(match config.kind {
        AdapterKind::ChatHttp => Box::new(ChatAdapter::new(config)?),
        AdapterKind::CompletionHttp => Box::new(CompletionAdapter::new(config)?),
        AdapterKind::ReplayFile => Box::new(ReplayAdapter::from_config(config)?),
    })
}
