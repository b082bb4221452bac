use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::HttpPolicy;
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    ChatHttp,
    CompletionHttp,
    ReplayFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 0.0,
            max_output_tokens: 64,
        }
    }
}

/// One model endpoint, usually loaded from a TOML file:
///
/// ```toml
/// model_id = "gpt-4"
/// kind = "chat_http"
/// base_url = "https://api.openai.com/v1"
/// remote_model = "gpt-4-0613"
/// auth_token_env = "OPENAI_API_KEY"
/// instruction_prefix = "Answer with a name only."
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpointConfig {
    pub model_id: String,
    pub kind: AdapterKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    /// Relative paths resolve against the directory of the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_path: Option<PathBuf>,
    /// Model name sent to the endpoint; defaults to `model_id`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remote_model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_token_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruction_prefix: Option<String>,
    #[serde(default)]
    pub sampling: SamplingParams,
    #[serde(default)]
    pub http: HttpPolicy,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
}

fn default_concurrency() -> usize {
    4
}

impl ModelEndpointConfig {
    pub fn replay(model_id: impl Into<String>, replay_path: impl Into<PathBuf>) -> Self {
        ModelEndpointConfig {
            model_id: model_id.into(),
            kind: AdapterKind::ReplayFile,
            base_url: None,
            replay_path: Some(replay_path.into()),
            remote_model: None,
            auth_token_env: None,
            instruction_prefix: None,
            sampling: SamplingParams::default(),
            http: HttpPolicy::default(),
            concurrency: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Error::Validation {
            fact_id: None,
            message: format!("model `{}`: {m}", self.model_id),
        };
        if self.model_id.trim().is_empty() {
            return Err(bad("empty model_id"));
        }
        match self.kind {
            AdapterKind::ChatHttp | AdapterKind::CompletionHttp => {
                if self.base_url.as_deref().is_none_or(|u| u.trim().is_empty()) {
                    return Err(bad("http adapters need base_url"));
                }
            }
            AdapterKind::ReplayFile => {
                if self.replay_path.is_none() {
                    return Err(bad("replay_file adapters need replay_path"));
                }
            }
        }
        if self.sampling.temperature != 0.0 {
            log::warn!(
                "model `{}` uses temperature {}; outputs may not be reproducible",
                self.model_id,
                self.sampling.temperature
            );
        }
        Ok(())
    }

    pub fn remote_model(&self) -> &str {
        self.remote_model.as_deref().unwrap_or(&self.model_id)
    }
}

pub fn load_model_config(path: &Path) -> Result<ModelEndpointConfig> {
    let text = io::read_text(path)?;
    let mut config: ModelEndpointConfig =
        toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    if let Some(rp) = &config.replay_path {
        if rp.is_relative() {
            if let Some(dir) = path.parent() {
                config.replay_path = Some(dir.join(rp));
            }
        }
    }
    config.validate()?;
    Ok(config)
}
