//! Evaluation of how current the factual knowledge of language models is.
//!
//! The pipeline runs in stages that talk only through files:
//! [`registry`] defines the facts and prompts, [`wikidata`] retrieves each
//! fact's dated answer set, [`adapters`] query models, [`judge`] classifies
//! every response as correct, outdated or irrelevant, and [`metrics`] turns
//! verdicts into rates, temporal summaries and edit scores. [`ike`] builds
//! in-context editing prompts.

pub mod adapters;
pub mod error;
pub mod http;
pub mod ike;
pub mod io;
pub mod judge;
pub mod manifest;
pub mod metrics;
pub mod registry;
pub mod wikidata;

pub use adapters::{
    build_adapter, registry_jobs, ModelAdapter, ModelEndpointConfig, PromptJob, ResponseOutcome,
    ResponseRecord, ResponseSet,
};
pub use error::{Error, Result};
pub use judge::{judge_response, judge_run, Classification, Normalizer, Verdict, VerdictSet};
pub use manifest::RunManifest;
pub use metrics::{BoxStats, EditOutcome, FactVerdict, Fraction, RateMode, RateReport};
pub use registry::{FactCategory, FactSpec, Registry};
pub use wikidata::{AnswerEntry, AnswerSnapshot, PartialDate, Rank, ValidityInterval};
