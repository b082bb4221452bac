use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Titles and office words dropped from both responses and aliases, so that
/// "President Emmanuel Macron" and "Emmanuel Macron" compare equal.
pub const DEFAULT_STOPLIST: &[&str] = &[
    "mr", "mrs", "ms", "miss", "dr", "sir", "dame", "lord", "lady", "hon", "honourable",
    "president", "prime", "minister", "premier", "chancellor", "king", "queen", "emperor",
    "sultan", "sheikh", "emir", "his", "her", "majesty", "highness", "excellency",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizerConfig {
    /// Strip combining marks after decomposition ("Piñera" == "Pinera").
    pub fold_diacritics: bool,
    pub stoplist: Vec<String>,
}

impl Default for NormalizerConfig {
    fn default() -> Self {
        NormalizerConfig {
            fold_diacritics: true,
            stoplist: DEFAULT_STOPLIST.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Normalizer {
    fold_diacritics: bool,
    stoplist: std::collections::HashSet<String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new(&NormalizerConfig::default())
    }
}

impl Normalizer {
    pub fn new(config: &NormalizerConfig) -> Self {
        let plain = Normalizer {
            fold_diacritics: config.fold_diacritics,
            stoplist: Default::default(),
        };
        let stoplist = config
            .stoplist
            .iter()
            .flat_map(|w| plain.tokens(w))
            .collect();
        Normalizer {
            fold_diacritics: config.fold_diacritics,
            stoplist,
        }
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        let lower: String = text.nfkc().collect::<String>().to_lowercase();
        let folded: String = if self.fold_diacritics {
            lower.nfd().filter(|c| !is_combining_mark(*c)).nfc().collect()
        } else {
            lower.nfc().collect()
        };
        let spaced: String = folded
            .chars()
            .map(|c| if c.is_alphanumeric() || is_combining_mark(c) { c } else { ' ' })
            .collect();
        spaced
            .split_whitespace()
            .filter(|t| !self.stoplist.contains(*t))
            .map(str::to_string)
            .collect()
    }

    /// Normalized token sequence of `text`.
    pub fn normalize_tokens(&self, text: &str) -> Vec<String> {
        self.tokens(text)
    }

    /// Normalized form: tokens joined by single spaces.
    pub fn normalize(&self, text: &str) -> String {
        self.tokens(text).join(" ")
    }
}

pub fn normalize(text: &str) -> String {
    Normalizer::default().normalize(text)
}
