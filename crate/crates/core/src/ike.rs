//! In-context knowledge editing (IKE) prompts.
//!
//! An IKE prompt supplies the up-to-date fact directly in the context,
//! preceded by demonstrations retrieved from a small pool. The model is left
//! untouched, so this only measures whether it can *use* a fact it is handed;
//! it requires a snapshot of the current answer and is not a realistic
//! deployment scenario.
//!
//! Frozen layout (blocks separated by one blank line, no trailing newline):
//!
//! ```text
//! Fact: <demonstration fact>
//! Question: <demonstration question>
//! Answer: <demonstration answer>
//!
//! Fact: <new fact>
//! Question: <question>
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::adapters::PromptJob;
use crate::error::{Error, Result};
use crate::http::{HttpClient, HttpPolicy};
use crate::io;
use crate::judge::Normalizer;
use crate::registry::{FactCategory, FactSpec, Registry};
use crate::wikidata::AnswerSnapshot;

pub const DEMONSTRATIONS_SCHEMA: &str = "tempofact.demonstrations/1";

const SEED_POOL: &str = include_str!("../data/demonstrations.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub fact_text: String,
    pub question: String,
    pub answer: String,
}

impl Demonstration {
    fn text(&self) -> String {
        format!("{} {} {}", self.fact_text, self.question, self.answer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemonstrationPool {
    pub schema_version: String,
    pub demonstrations: Vec<Demonstration>,
}

impl DemonstrationPool {
    pub fn validate(&self) -> Result<()> {
        io::check_schema("demonstration pool", &self.schema_version, DEMONSTRATIONS_SCHEMA)?;
        for (i, d) in self.demonstrations.iter().enumerate() {
            if [&d.fact_text, &d.question, &d.answer].iter().any(|s| s.trim().is_empty()) {
                return Err(Error::Validation {
                    fact_id: None,
                    message: format!("demonstration {i} has an empty field"),
                });
            }
        }
        Ok(())
    }
}

pub fn parse_pool(text: &str, context: &str) -> Result<DemonstrationPool> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| Error::parse(context, e))?;
    let found = raw
        .get("schema_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::parse(context, "missing schema_version"))?;
    io::check_schema(context, found, DEMONSTRATIONS_SCHEMA)?;
    let pool: DemonstrationPool = raw.try_into().map_err(|e| Error::parse(context, e))?;
    pool.validate()?;
    Ok(pool)
}

pub fn load_pool(path: &Path) -> Result<DemonstrationPool> {
    parse_pool(&io::read_text(path)?, &path.display().to_string())
}

pub fn seed_pool() -> DemonstrationPool {
    parse_pool(SEED_POOL, "built-in demonstration pool").expect("built-in pool is valid")
}

pub fn seed_pool_text() -> &'static str {
    SEED_POOL
}

/// Scores candidate texts against a query; higher is more similar.
pub trait SimilarityScorer {
    fn scores(&self, query: &str, candidates: &[String]) -> Result<Vec<f64>>;
}

/// Cosine similarity of normalized token sets: `|A ∩ B| / sqrt(|A| |B|)`.
#[derive(Debug, Clone, Default)]
pub struct TokenCosine {
    normalizer: Normalizer,
}

impl TokenCosine {
    pub fn new(normalizer: Normalizer) -> Self {
        TokenCosine { normalizer }
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        let sa: HashSet<String> = self.normalizer.normalize_tokens(a).into_iter().collect();
        let sb: HashSet<String> = self.normalizer.normalize_tokens(b).into_iter().collect();
        if sa.is_empty() || sb.is_empty() {
            return 0.0;
        }
        let shared = sa.intersection(&sb).count() as f64;
        shared / ((sa.len() * sb.len()) as f64).sqrt()
    }
}

impl SimilarityScorer for TokenCosine {
    fn scores(&self, query: &str, candidates: &[String]) -> Result<Vec<f64>> {
        Ok(candidates.iter().map(|c| self.similarity(query, c)).collect())
    }
}

/// Cosine similarity of vectors from an OpenAI-style `/embeddings` endpoint.
pub struct EmbeddingScorer {
    url: String,
    model: String,
    token: Option<String>,
    client: HttpClient,
}

impl EmbeddingScorer {
    pub fn new(base_url: &str, model: impl Into<String>, token: Option<String>, policy: HttpPolicy) -> Result<Self> {
        Ok(EmbeddingScorer {
            url: format!("{}/embeddings", base_url.trim_end_matches('/')),
            model: model.into(),
            token,
            client: HttpClient::new(policy)?,
        })
    }

    fn embed(&self, inputs: &[String]) -> Result<Vec<Vec<f64>>> {
        let body = json!({"model": self.model, "input": inputs});
        let reply = self.client.execute(&|c| {
            let req = c.post(&self.url).json(&body);
            match &self.token {
                Some(t) => req.bearer_auth(t),
                None => req,
            }
        })?;
        if !(200..300).contains(&reply.status) {
            return Err(Error::Endpoint(format!("{}: HTTP {}", self.url, reply.status)));
        }
        let value: Value = serde_json::from_str(&reply.body)
            .map_err(|e| Error::Endpoint(format!("{}: malformed JSON: {e}", self.url)))?;
        let data = value
            .get("data")
            .and_then(Value::as_array)
            .filter(|d| d.len() == inputs.len())
            .ok_or_else(|| Error::Endpoint(format!("{}: expected {} embeddings", self.url, inputs.len())))?;
        data.iter()
            .map(|d| {
                d.get("embedding")
                    .and_then(Value::as_array)
                    .map(|v| v.iter().filter_map(Value::as_f64).collect())
                    .ok_or_else(|| Error::Endpoint(format!("{}: entry without embedding", self.url)))
            })
            .collect()
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

impl SimilarityScorer for EmbeddingScorer {
    fn scores(&self, query: &str, candidates: &[String]) -> Result<Vec<f64>> {
        let mut inputs = Vec::with_capacity(candidates.len() + 1);
        inputs.push(query.to_string());
        inputs.extend(candidates.iter().cloned());
        let vectors = self.embed(&inputs)?;
        Ok(vectors[1..].iter().map(|v| cosine(&vectors[0], v)).collect())
    }
}

/// Top `k` demonstrations by similarity to the query triple; ties keep pool order.
pub fn retrieve_context(
    query: &Demonstration,
    pool: &[Demonstration],
    k: usize,
    scorer: &dyn SimilarityScorer,
) -> Result<Vec<Demonstration>> {
    if k > pool.len() {
        return Err(Error::PoolTooSmall {
            requested: k,
            available: pool.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let texts: Vec<String> = pool.iter().map(Demonstration::text).collect();
    let scores = scorer.scores(&query.text(), &texts)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    Ok(order.into_iter().take(k).map(|i| pool[i].clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IkePromptSpec {
    pub question: String,
    pub new_fact_text: String,
    pub context: Vec<Demonstration>,
}

impl IkePromptSpec {
    pub fn k(&self) -> usize {
        self.context.len()
    }
}

pub fn build_ike_prompt(spec: &IkePromptSpec) -> String {
    let mut blocks: Vec<String> = spec
        .context
        .iter()
        .map(|d| format!("Fact: {}\nQuestion: {}\nAnswer: {}", d.fact_text, d.question, d.answer))
        .collect();
    blocks.push(format!("Fact: {}\nQuestion: {}", spec.new_fact_text, spec.question));
    blocks.join("\n\n")
}

fn current_label<'a>(fact: &FactSpec, snapshot: &'a AnswerSnapshot) -> Result<&'a str> {
    if snapshot.fact_id != fact.fact_id {
        return Err(Error::FactMismatch {
            response: fact.fact_id.clone(),
            snapshot: snapshot.fact_id.clone(),
        });
    }
    Ok(&snapshot.current_entries()?[0].canonical_label)
}

/// Declarative sentence stating the fact's current answer.
pub fn new_fact_text(fact: &FactSpec, snapshot: &AnswerSnapshot) -> Result<String> {
    let label = current_label(fact, snapshot)?;
    Ok(match (fact.category, fact.role_title.as_deref()) {
        (FactCategory::Athlete, _) | (_, None) => format!("{} plays for {label}.", fact.subject_label),
        (_, Some(role)) => format!("The {role} of {} is {label}.", fact.subject_label),
    })
}

/// IKE prompts for every prompt of each listed fact, in the given order.
pub fn ike_jobs(
    registry: &Registry,
    snapshots: &BTreeMap<String, AnswerSnapshot>,
    fact_ids: &[String],
    pool: &DemonstrationPool,
    k: usize,
    scorer: &dyn SimilarityScorer,
) -> Result<Vec<PromptJob>> {
    let missing: Vec<String> = fact_ids.iter().filter(|f| !snapshots.contains_key(*f)).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::MissingSnapshot { fact_ids: missing });
    }
    let mut jobs = Vec::new();
    for id in fact_ids {
        let fact = registry
            .get(id)
            .ok_or_else(|| Error::invalid(id, "fact is not in the registry"))?;
        let snapshot = &snapshots[id];
        let fact_text = new_fact_text(fact, snapshot)?;
        let answer = current_label(fact, snapshot)?.to_string();
        for (i, question) in fact.render_prompts(None)?.into_iter().enumerate() {
            let query = Demonstration {
                fact_text: fact_text.clone(),
                question: question.clone(),
                answer: answer.clone(),
            };
            let context = retrieve_context(&query, &pool.demonstrations, k, scorer)?;
            let spec = IkePromptSpec {
                question,
                new_fact_text: fact_text.clone(),
                context,
            };
            jobs.push(PromptJob {
                fact_id: id.clone(),
                prompt_index: i as u8,
                prompt: build_ike_prompt(&spec),
            });
        }
    }
    Ok(jobs)
}
