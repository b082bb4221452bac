use std::collections::HashMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ModelAdapter, ModelEndpointConfig, ModelOutput, PromptJob};
use crate::error::{Error, Result};
use crate::io;

/// One recorded output; replay files hold one per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayLine {
    pub fact_id: String,
    pub prompt_index: u8,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queried_at: Option<DateTime<Utc>>,
}

/// Serves recorded outputs keyed by `(fact_id, prompt_index)`.
pub struct ReplayAdapter {
    model_id: String,
    lines: HashMap<(String, u8), ReplayLine>,
}

impl ReplayAdapter {
    pub fn parse(model_id: impl Into<String>, text: &str, context: &str) -> Result<Self> {
        let mut lines = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ReplayLine = serde_json::from_str(line)
                .map_err(|e| Error::parse(format!("{context}:{}", idx + 1), e))?;
            let key = (rec.fact_id.clone(), rec.prompt_index);
            if lines.insert(key, rec).is_some() {
                return Err(Error::parse(
                    format!("{context}:{}", idx + 1),
                    "duplicate (fact_id, prompt_index)",
                ));
            }
        }
        Ok(ReplayAdapter {
            model_id: model_id.into(),
            lines,
        })
    }

    pub fn load(model_id: impl Into<String>, path: &Path) -> Result<Self> {
        Self::parse(model_id, &io::read_text(path)?, &path.display().to_string())
    }

    pub fn from_config(config: &ModelEndpointConfig) -> Result<Self> {
        let path = config
            .replay_path
            .as_deref()
            .ok_or_else(|| Error::Endpoint(format!("model `{}` has no replay_path", config.model_id)))?;
        Self::load(&config.model_id, path)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

impl ModelAdapter for ReplayAdapter {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn complete(&self, job: &PromptJob) -> Result<ModelOutput> {
        let rec = self
            .lines
            .get(&(job.fact_id.clone(), job.prompt_index))
            .ok_or_else(|| {
                Error::Endpoint(format!(
                    "replay file has no output for ({}, {})",
                    job.fact_id, job.prompt_index
                ))
            })?;
        Ok(ModelOutput {
            raw_text: rec.raw_text.clone(),
            queried_at: rec.queried_at.unwrap_or(DateTime::UNIX_EPOCH),
        })
    }
}
