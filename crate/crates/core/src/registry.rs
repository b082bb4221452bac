//! The registry of time-sensitive facts and their prompt templates.
//!
//! A registry is a TOML document:
//!
//! ```toml
//! schema_version = "tempofact.registry/1"
//!
//! [[facts]]
//! fact_id = "ronaldo_club"
//! category = "athlete"
//! subject_label = "Cristiano Ronaldo"
//! subject_qid = "Q11571"
//! property_pid = "P54"
//! prompt_templates = ["What is {subject}'s club?", "...", "..."]
//! ```
//!
//! Templates use two placeholders: `{subject}` (the subject label) and
//! `{role}` (the role title, required for country and organization facts).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const REGISTRY_SCHEMA: &str = "tempofact.registry/1";

/// Number of paraphrased prompts every fact carries.
pub const PROMPTS_PER_FACT: usize = 3;

const SEED_REGISTRY: &str = include_str!("../data/registry.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactCategory {
    Country,
    Athlete,
    Organization,
}

impl FactCategory {
    pub fn requires_role(self) -> bool {
        matches!(self, FactCategory::Country | FactCategory::Organization)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSpec {
    pub fact_id: String,
    pub category: FactCategory,
    pub subject_label: String,
    pub subject_qid: String,
    pub property_pid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role_title: Option<String>,
    pub prompt_templates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub schema_version: String,
    pub facts: Vec<FactSpec>,
}

impl Registry {
    pub fn get(&self, fact_id: &str) -> Option<&FactSpec> {
        self.facts.iter().find(|f| f.fact_id == fact_id)
    }

    pub fn count(&self, category: FactCategory) -> usize {
        self.facts.iter().filter(|f| f.category == category).count()
    }

    /// Checks every registry and fact invariant.
    pub fn validate(&self) -> Result<()> {
        io::check_schema("registry", &self.schema_version, REGISTRY_SCHEMA)?;
        if self.facts.is_empty() {
            return Err(Error::Validation {
                fact_id: None,
                message: "empty registry".into(),
            });
        }
        let mut seen = HashSet::new();
        for fact in &self.facts {
            if !seen.insert(fact.fact_id.as_str()) {
                return Err(Error::invalid(&fact.fact_id, "duplicate fact_id"));
            }
            fact.validate()?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str, prefix: char) -> bool {
    let mut chars = s.chars();
    chars.next() == Some(prefix)
        && s.len() > 1
        && chars.all(|c| c.is_ascii_digit())
}

impl FactSpec {
    pub fn validate(&self) -> Result<()> {
        let id = &self.fact_id;
        if id.trim().is_empty() {
            return Err(Error::Validation {
                fact_id: None,
                message: "fact with empty fact_id".into(),
            });
        }
        if self.subject_label.trim().is_empty() {
            return Err(Error::invalid(id, "empty subject_label"));
        }
        if !is_identifier(&self.subject_qid, 'Q') {
            return Err(Error::invalid(
                id,
                format!("subject_qid `{}` is not an entity id (Q…)", self.subject_qid),
            ));
        }
        if !is_identifier(&self.property_pid, 'P') {
            return Err(Error::invalid(
                id,
                format!("property_pid `{}` is not a property id (P…)", self.property_pid),
            ));
        }
        if self.prompt_templates.len() != PROMPTS_PER_FACT {
            return Err(Error::invalid(
                id,
                format!(
                    "expected {PROMPTS_PER_FACT} prompt templates, found {}",
                    self.prompt_templates.len()
                ),
            ));
        }
        let has_role = self
            .role_title
            .as_deref()
            .is_some_and(|r| !r.trim().is_empty());
        match (self.category.requires_role(), has_role) {
            (true, false) => return Err(Error::invalid(id, "missing role_title")),
            (false, true) => {
                return Err(Error::invalid(id, "role_title is only allowed for country and organization facts"))
            }
            _ => {}
        }
        if self.category == FactCategory::Country {
            if let Some(idx) = self
                .prompt_templates
                .iter()
                .position(|t| !t.contains("{role}"))
            {
                return Err(Error::invalid(
                    id,
                    format!("country template {idx} does not reference {{role}}"),
                ));
            }
        }
        Ok(())
    }

    /// Renders the three prompts. A non-empty `instruction_prefix` is prepended
    /// to each prompt, joined by `". "`.
    pub fn render_prompts(&self, instruction_prefix: Option<&str>) -> Result<Vec<String>> {
        let prefix = instruction_prefix
            .map(|p| p.trim().trim_end_matches('.').trim_end())
            .filter(|p| !p.is_empty());
        self.prompt_templates
            .iter()
            .map(|template| {
                let body = self.fill(template)?;
                Ok(match prefix {
                    Some(p) => format!("{p}. {body}"),
                    None => body,
                })
            })
            .collect()
    }

    fn fill(&self, template: &str) -> Result<String> {
        let mut out = String::with_capacity(template.len() + 32);
        let mut rest = template;
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let close = after.find('}').ok_or_else(|| {
                Error::Template(format!("unclosed placeholder in `{template}` ({})", self.fact_id))
            })?;
            let name = &after[..close];
            match name {
                "subject" => out.push_str(&self.subject_label),
                "role" => match self.role_title.as_deref() {
                    Some(role) if !role.is_empty() => out.push_str(role),
                    _ => {
                        return Err(Error::Template(format!(
                            "placeholder {{role}} left unsubstituted in fact `{}`",
                            self.fact_id
                        )))
                    }
                },
                other => {
                    return Err(Error::Template(format!(
                        "unknown placeholder {{{other}}} in fact `{}`",
                        self.fact_id
                    )))
                }
            }
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

pub fn render_prompts(fact: &FactSpec, instruction_prefix: Option<&str>) -> Result<Vec<String>> {
    fact.render_prompts(instruction_prefix)
}

pub fn parse_registry(text: &str, context: &str) -> Result<Registry> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| Error::parse(context, e))?;
    match raw.get("schema_version").and_then(|v| v.as_str()) {
        Some(found) => io::check_schema(context, found, REGISTRY_SCHEMA)?,
        None => return Err(Error::parse(context, "missing schema_version")),
    }
    let registry: Registry = raw.try_into().map_err(|e| Error::parse(context, e))?;
    registry.validate()?;
    Ok(registry)
}

pub fn load_registry(path: &Path) -> Result<Registry> {
    let text = io::read_text(path)?;
    parse_registry(&text, &path.display().to_string())
}

pub fn registry_to_string(registry: &Registry) -> Result<String> {
    toml::to_string(registry).map_err(|e| Error::parse("registry", e))
}

pub fn save_registry(registry: &Registry, path: &Path) -> Result<()> {
    io::atomic_write(path, registry_to_string(registry)?.as_bytes())
}

/// The registry shipped with the crate.
pub fn seed_registry() -> Registry {
    parse_registry(SEED_REGISTRY, "seed registry").expect("shipped seed registry is valid")
}

pub fn seed_registry_text() -> &'static str {
    SEED_REGISTRY
}

/// Template lint configuration: words that signal past tense or an explicit
/// time frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintConfig {
    pub past_tense_markers: Vec<String>,
}

impl Default for LintConfig {
    fn default() -> Self {
        let words = [
            "was",
            "were",
            "had",
            "did",
            "former",
            "formerly",
            "previous",
            "previously",
            "ago",
            "once",
        ];
        LintConfig {
            past_tense_markers: words.iter().map(|w| w.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintWarning {
    pub fact_id: String,
    pub template_index: usize,
    pub message: String,
}

fn has_four_digit_year(template: &str) -> Option<&str> {
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start == 4 {
                return Some(&template[start..i]);
            }
        } else {
            i += 1;
        }
    }
    None
}

/// Flags templates that carry a year or a past-tense marker. Never mutates.
pub fn lint_templates(registry: &Registry, config: &LintConfig) -> Vec<LintWarning> {
    let markers: HashSet<String> = config
        .past_tense_markers
        .iter()
        .map(|m| m.to_lowercase())
        .collect();
    let mut warnings = Vec::new();
    for fact in &registry.facts {
        for (idx, template) in fact.prompt_templates.iter().enumerate() {
            let mut problems = Vec::new();
            if let Some(year) = has_four_digit_year(template) {
                problems.push(format!("explicit year {year}"));
            }
            let lowered = template.to_lowercase();
            let hits: Vec<&str> = lowered
                .split(|c: char| !c.is_alphanumeric())
                .filter(|w| markers.contains(*w))
                .collect();
            if !hits.is_empty() {
                problems.push(format!("past-tense marker {}", hits.join(", ")));
            }
            if !problems.is_empty() {
                warnings.push(LintWarning {
                    fact_id: fact.fact_id.clone(),
                    template_index: idx,
                    message: problems.join("; "),
                });
            }
        }
    }
    warnings
}
