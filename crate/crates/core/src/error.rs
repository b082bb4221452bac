use std::path::PathBuf;

/// Every failure the toolkit can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{}", validation_message(fact_id.as_deref(), message))]
    Validation {
        fact_id: Option<String>,
        message: String,
    },

    #[error("template error: {0}")]
    Template(String),

    #[error("unsupported schema version `{found}` in {context} (expected `{expected}`)")]
    SchemaVersion {
        context: String,
        found: String,
        expected: String,
    },

    #[error("network error: {0}")]
    Network(String),

    #[error("endpoint rejected query: {0}")]
    Query(String),

    #[error("no statements found for fact `{fact_id}`")]
    EmptyAnswer { fact_id: String },

    #[error("snapshot for fact `{fact_id}` has no current entry")]
    DegradedSnapshot { fact_id: String },

    #[error("authentication error: {0}")]
    Auth(String),

    #[error("endpoint error: {0}")]
    Endpoint(String),

    #[error("response for fact `{response}` judged against snapshot for `{snapshot}`")]
    FactMismatch { response: String, snapshot: String },

    #[error("no snapshot for facts: {}", fact_ids.join(", "))]
    MissingSnapshot { fact_ids: Vec<String> },

    #[error("model `{model_id}` does not have exactly 3 verdicts for facts: {}", fact_ids.join(", "))]
    IncompleteVerdicts {
        model_id: String,
        fact_ids: Vec<String>,
    },

    #[error("no correct or outdated verdict with a dated interval for model `{model_id}`")]
    NoDatedMatches { model_id: String },

    #[error("missing post-edit verdict for fact `{fact_id}` prompt {prompt_index}")]
    MissingPostEdit { fact_id: String, prompt_index: u8 },

    #[error("no edit targets: the pre-edit verdicts contain no outdated fact")]
    NoEditTargets,

    #[error("value outside [0, 1]: {0}")]
    Domain(String),

    #[error("subset size {requested} is invalid for {available} edit targets (must be 1..={available})")]
    SubsetTooLarge { requested: usize, available: usize },

    #[error("demonstration pool has {available} entries, {requested} requested")]
    PoolTooSmall { requested: usize, available: usize },

    #[error("hash mismatch for {path}: manifest records {expected}, file has {found}")]
    HashMismatch {
        path: String,
        expected: String,
        found: String,
    },
}

fn validation_message(fact_id: Option<&str>, message: &str) -> String {
    match fact_id {
        Some(id) => format!("validation error in fact `{id}`: {message}"),
        None => format!("validation error: {message}"),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn invalid(fact_id: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            fact_id: Some(fact_id.into()),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
