//! Optional settings file passed with `--config`.
//!
//! ```toml
//! seed = 7
//!
//! [wikidata]
//! endpoint = "https://query.wikidata.org/sparql"
//! concurrency = 4
//!
//! [wikidata.http]
//! max_retries = 4
//! user_agent = "my-eval/1.0 (me@example.org)"
//!
//! [normalizer]
//! fold_diacritics = true
//! ```
//!
//! Command-line flags and environment variables take precedence.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tempofact_core::http::HttpPolicy;
use tempofact_core::judge::NormalizerConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: Option<u64>,
    pub wikidata: WikidataSettings,
    pub normalizer: NormalizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WikidataSettings {
    pub endpoint: Option<String>,
    pub concurrency: usize,
    pub http: HttpPolicy,
}

impl Default for WikidataSettings {
    fn default() -> Self {
        WikidataSettings {
            endpoint: None,
            concurrency: 4,
            http: HttpPolicy::default(),
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> tempofact_core::Result<Self> {
        let text = tempofact_core::io::read_text(path)?;
        toml::from_str(&text).map_err(|e| tempofact_core::Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
