use std::collections::BTreeMap;

use serde::Deserialize;

use super::{AnswerEntry, PartialDate, Rank, ValidityInterval};
use crate::error::{Error, Result};
use crate::registry::FactSpec;

const ENTITY_PREFIX: &str = "http://www.wikidata.org/entity/";
const ONTOLOGY_PREFIX: &str = "http://wikiba.se/ontology#";

/// SPARQL query retrieving every statement of `(subject, property)` with
/// start/end qualifiers, rank and English aliases. One row per alias.
pub fn answer_set_query(subject_qid: &str, property_pid: &str) -> String {
    format!(
        "SELECT ?statement ?value ?valueLabel ?rank ?start ?startPrecision ?end ?endPrecision ?alias WHERE {{
  wd:{subject_qid} p:{property_pid} ?statement .
  ?statement ps:{property_pid} ?value ;
             wikibase:rank ?rank .
  OPTIONAL {{ ?statement pqv:P580 ?startNode .
             ?startNode wikibase:timeValue ?start ;
                        wikibase:timePrecision ?startPrecision . }}
  OPTIONAL {{ ?statement pqv:P582 ?endNode .
             ?endNode wikibase:timeValue ?end ;
                      wikibase:timePrecision ?endPrecision . }}
  OPTIONAL {{ ?value skos:altLabel ?alias . FILTER(LANG(?alias) = \"en\") }}
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language \"en\" . }}
}}"
    )
}

#[derive(Deserialize)]
struct SparqlResults {
    results: SparqlBindings,
}

#[derive(Deserialize)]
struct SparqlBindings {
    bindings: Vec<BTreeMap<String, Term>>,
}

#[derive(Deserialize)]
struct Term {
    #[serde(rename = "type")]
    kind: String,
    value: String,
}

#[derive(Default)]
struct Group {
    qid: Option<String>,
    label: Option<String>,
    rank: Option<Rank>,
    start: Option<PartialDate>,
    end: Option<PartialDate>,
    aliases: Vec<String>,
}

/// Truncates an xsd:dateTime to the given Wikidata precision.
pub(crate) fn parse_time(value: &str, precision: Option<&str>) -> Result<PartialDate, String> {
    let date = value.split('T').next().unwrap_or(value);
    let (negative, body) = match date.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, date.strip_prefix('+').unwrap_or(date)),
    };
    let mut parts = body.split('-');
    let year: i32 = parts
        .next()
        .and_then(|y| y.parse().ok())
        .ok_or_else(|| format!("bad time value `{value}`"))?;
    let year = if negative { -year } else { year };
    let month: u32 = parts.next().and_then(|m| m.parse().ok()).unwrap_or(0);
    let day: u32 = parts.next().and_then(|d| d.parse().ok()).unwrap_or(0);
    let precision: u8 = match precision {
        Some(p) => p.trim().parse().map_err(|_| format!("bad time precision `{p}`"))?,
        None => 11,
    };
    if precision >= 11 && month >= 1 && day >= 1 {
        PartialDate::ymd(year, month, day).ok_or_else(|| format!("invalid date `{value}`"))
    } else if precision >= 10 && (1..=12).contains(&month) {
        Ok(PartialDate {
            year,
            month: Some(month),
            day: None,
        })
    } else {
        Ok(PartialDate::year(year))
    }
}

fn parse_rank(iri: &str) -> Rank {
    match iri.strip_prefix(ONTOLOGY_PREFIX).unwrap_or(iri) {
        "PreferredRank" => Rank::Preferred,
        "DeprecatedRank" => Rank::Deprecated,
        "NormalRank" => Rank::Normal,
        other => {
            log::warn!("unknown statement rank `{other}`, treating as normal");
            Rank::Normal
        }
    }
}

/// Turns a SPARQL JSON result document into answer entries, one per statement.
///
/// Multiple start qualifiers keep the earliest, multiple end qualifiers the
/// latest. Statements whose start lies after their end are dropped.
pub fn parse_sparql_results(fact: &FactSpec, body: &str) -> Result<Vec<AnswerEntry>> {
    let context = format!("SPARQL results for `{}`", fact.fact_id);
    let doc: SparqlResults = serde_json::from_str(body).map_err(|e| Error::parse(&context, e))?;
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();

    for (row_idx, row) in doc.results.bindings.iter().enumerate() {
        let (Some(statement), Some(value)) = (row.get("statement"), row.get("value")) else {
            log::warn!("{context}: row {row_idx} lacks statement or value, skipped");
            continue;
        };
        let group = groups.entry(statement.value.clone()).or_default();
        if value.kind == "uri" {
            if let Some(q) = value.value.strip_prefix(ENTITY_PREFIX) {
                group.qid = Some(q.to_string());
            }
        }
        let label = row
            .get("valueLabel")
            .map(|t| t.value.clone())
            .unwrap_or_else(|| match value.value.strip_prefix(ENTITY_PREFIX) {
                Some(q) => q.to_string(),
                None => value.value.clone(),
            });
        group.label.get_or_insert(label);
        if let Some(rank) = row.get("rank") {
            group.rank.get_or_insert(parse_rank(&rank.value));
        }
        if let Some(start) = row.get("start") {
            let precision = row.get("startPrecision").map(|t| t.value.as_str());
            let d = parse_time(&start.value, precision).map_err(|m| Error::parse(&context, m))?;
            group.start = Some(group.start.map_or(d, |old| old.min(d)));
        }
        if let Some(end) = row.get("end") {
            let precision = row.get("endPrecision").map(|t| t.value.as_str());
            let d = parse_time(&end.value, precision).map_err(|m| Error::parse(&context, m))?;
            group.end = Some(group.end.map_or(d, |old| old.max(d)));
        }
        if let Some(alias) = row.get("alias") {
            group.aliases.push(alias.value.clone());
        }
    }

    let mut entries = Vec::with_capacity(groups.len());
    for (statement, group) in groups {
        let label = group.label.unwrap_or_default();
        let interval = match ValidityInterval::new(group.start, group.end) {
            Ok(iv) => iv,
            Err(m) => {
                log::warn!("{context}: dropping statement {statement} (`{label}`): {m}");
                continue;
            }
        };
        entries.push(AnswerEntry::new(
            label,
            group.qid,
            group.aliases,
            interval,
            group.rank.unwrap_or(Rank::Normal),
        ));
    }
    if entries.is_empty() {
        return Err(Error::EmptyAnswer {
            fact_id: fact.fact_id.clone(),
        });
    }
    Ok(entries)
}
