use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use chrono::{DateTime, Utc};

use super::{parse_sparql_results, answer_set_query, AnswerSnapshot};
use crate::error::{Error, Result};
use crate::http::{HttpClient, HttpPolicy};
use crate::io;
use crate::registry::FactSpec;

pub const DEFAULT_ENDPOINT: &str = "https://query.wikidata.org/sparql";

/// Source of SPARQL JSON result documents.
pub trait SparqlTransport: Sync {
    fn run(&self, fact: &FactSpec, query: &str) -> Result<String>;
    /// Recorded as `source_endpoint` on every snapshot.
    fn endpoint(&self) -> String;
}

pub struct HttpSparqlTransport {
    endpoint: String,
    client: HttpClient,
}

impl HttpSparqlTransport {
    pub fn new(endpoint: impl Into<String>, policy: HttpPolicy) -> Result<Self> {
        Ok(HttpSparqlTransport {
            endpoint: endpoint.into(),
            client: HttpClient::new(policy)?,
        })
    }
}

impl SparqlTransport for HttpSparqlTransport {
    fn run(&self, fact: &FactSpec, query: &str) -> Result<String> {
        let reply = self.client.execute(&|c| {
            c.get(&self.endpoint)
                .query(&[("query", query), ("format", "json")])
                .header("Accept", "application/sparql-results+json")
        })?;
        if (200..300).contains(&reply.status) {
            return Ok(reply.body);
        }
        let excerpt: String = reply.body.chars().take(300).collect();
        Err(Error::Query(format!(
            "HTTP {} for fact `{}`: {}",
            reply.status,
            fact.fact_id,
            excerpt.trim()
        )))
    }

    fn endpoint(&self) -> String {
        self.endpoint.clone()
    }
}

/// Serves recorded result documents from `<dir>/<fact_id>.json`.
pub struct FixtureTransport {
    dir: PathBuf,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into() }
    }
}

impl SparqlTransport for FixtureTransport {
    fn run(&self, fact: &FactSpec, _query: &str) -> Result<String> {
        io::read_text(&self.dir.join(format!("{}.json", fact.fact_id)))
    }

    fn endpoint(&self) -> String {
        format!("fixture:{}", self.dir.display())
    }
}

pub fn fetch_answer_set(
    transport: &dyn SparqlTransport,
    fact: &FactSpec,
    retrieved_at: DateTime<Utc>,
) -> Result<AnswerSnapshot> {
    let query = answer_set_query(&fact.subject_qid, &fact.property_pid);
    let body = transport.run(fact, &query)?;
    let entries = parse_sparql_results(fact, &body)?;
    let snapshot = AnswerSnapshot::new(&fact.fact_id, retrieved_at, transport.endpoint(), entries)?;
    if snapshot.degraded {
        log::warn!("fact `{}` has no current entry", fact.fact_id);
    }
    Ok(snapshot)
}

#[derive(Debug)]
pub struct FetchOutcome {
    pub fact_id: String,
    pub result: Result<AnswerSnapshot>,
}

/// Fetches every fact with at most `concurrency` requests in flight.
/// Outcomes come back in input order.
pub fn fetch_answer_sets(
    transport: &dyn SparqlTransport,
    facts: &[FactSpec],
    retrieved_at: DateTime<Utc>,
    concurrency: usize,
) -> Vec<FetchOutcome> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<AnswerSnapshot>>>> =
        Mutex::new((0..facts.len()).map(|_| None).collect());
    let workers = concurrency.clamp(1, facts.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= facts.len() {
                    break;
                }
                let result = fetch_answer_set(transport, &facts[i], retrieved_at);
                slots.lock().expect("fetch slots poisoned")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("fetch slots poisoned")
        .into_iter()
        .zip(facts)
        .map(|(r, f)| FetchOutcome {
            fact_id: f.fact_id.clone(),
            result: r.expect("every slot is filled"),
        })
        .collect()
}
