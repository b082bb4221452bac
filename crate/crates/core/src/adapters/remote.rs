use chrono::Utc;
use serde_json::{json, Value};

use super::{ModelAdapter, ModelEndpointConfig, ModelOutput, PromptJob};
use crate::error::{Error, Result};
use crate::http::{HttpClient, HttpReply};

struct Remote {
    model_id: String,
    remote_model: String,
    url: String,
    token: Option<String>,
    temperature: f64,
    max_tokens: u32,
    client: HttpClient,
}

impl Remote {
    fn new(config: &ModelEndpointConfig, route: &str) -> Result<Self> {
        let token = match &config.auth_token_env {
            Some(var) => match std::env::var(var) {
                Ok(t) if !t.trim().is_empty() => Some(t),
                _ => {
                    return Err(Error::Auth(format!(
                        "environment variable `{var}` for model `{}` is not set",
                        config.model_id
                    )))
                }
            },
            None => None,
        };
        let base = config.base_url.as_deref().unwrap_or_default().trim_end_matches('/');
        Ok(Remote {
            model_id: config.model_id.clone(),
            remote_model: config.remote_model().to_string(),
            url: format!("{base}/{route}"),
            token,
            temperature: config.sampling.temperature,
            max_tokens: config.sampling.max_output_tokens,
            client: HttpClient::new(config.http.clone())?,
        })
    }

    fn post(&self, body: &Value) -> Result<Value> {
        let reply: HttpReply = self.client.execute(&|c| {
            let req = c.post(&self.url).json(body);
            match &self.token {
                Some(t) => req.bearer_auth(t),
                None => req,
            }
        })?;
        match reply.status {
            200..=299 => serde_json::from_str(&reply.body)
                .map_err(|e| Error::Endpoint(format!("{}: malformed JSON response: {e}", self.url))),
            401 | 403 => Err(Error::Auth(format!(
                "{} rejected credentials for model `{}` (HTTP {})",
                self.url, self.model_id, reply.status
            ))),
            status => {
                let excerpt: String = reply.body.chars().take(300).collect();
                Err(Error::Endpoint(format!("{}: HTTP {status}: {}", self.url, excerpt.trim())))
            }
        }
    }

    fn missing(&self, what: &str) -> Error {
        Error::Endpoint(format!("{}: response has no {what}", self.url))
    }
}

/// OpenAI-style `POST {base_url}/chat/completions`.
pub struct ChatAdapter(Remote);

impl ChatAdapter {
    pub fn new(config: &ModelEndpointConfig) -> Result<Self> {
        Ok(ChatAdapter(Remote::new(config, "chat/completions")?))
    }
}

impl ModelAdapter for ChatAdapter {
    fn model_id(&self) -> &str {
        &self.0.model_id
    }

    fn complete(&self, job: &PromptJob) -> Result<ModelOutput> {
        let r = &self.0;
        let queried_at = Utc::now();
        let body = json!({
            "model": r.remote_model,
            "messages": [{"role": "user", "content": job.prompt}],
            "temperature": r.temperature,
            "max_tokens": r.max_tokens,
        });
        let value = r.post(&body)?;
        let text = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| r.missing("choices[0].message.content"))?;
        Ok(ModelOutput {
            raw_text: text.to_string(),
            queried_at,
        })
    }
}

/// OpenAI-style `POST {base_url}/completions`.
pub struct CompletionAdapter(Remote);

impl CompletionAdapter {
    pub fn new(config: &ModelEndpointConfig) -> Result<Self> {
        Ok(CompletionAdapter(Remote::new(config, "completions")?))
    }
}

impl ModelAdapter for CompletionAdapter {
    fn model_id(&self) -> &str {
        &self.0.model_id
    }

    fn complete(&self, job: &PromptJob) -> Result<ModelOutput> {
        let r = &self.0;
        let queried_at = Utc::now();
        let body = json!({
            "model": r.remote_model,
            "prompt": job.prompt,
            "temperature": r.temperature,
            "max_tokens": r.max_tokens,
        });
        let value = r.post(&body)?;
        let text = value
            .pointer("/choices/0/text")
            .and_then(Value::as_str)
            .ok_or_else(|| r.missing("choices[0].text"))?;
        Ok(ModelOutput {
            raw_text: text.to_string(),
            queried_at,
        })
    }
}
