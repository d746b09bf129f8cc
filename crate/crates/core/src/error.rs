use std::path::PathBuf;

/// Errors produced anywhere in the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed record at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("missing required field `{field}`")]
    Schema { field: &'static str },

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("unsupported event type `{0}`")]
    UnsupportedEventType(String),

    #[error("dangling references: players {players:?}, matches {matches:?}")]
    DanglingReference { players: Vec<u64>, matches: Vec<u64> },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("feature catalog mismatch: expected {expected}, found {found}")]
    CatalogMismatch { expected: String, found: String },

    #[error("training labels are degenerate: {0}")]
    DegenerateLabels(String),

    #[error("solver did not converge after {iterations} epochs (duality gap {gap:.3e})")]
    Convergence { iterations: usize, gap: f64 },

    #[error("metric undefined: {0}")]
    Undefined(String),

    #[error("parameter out of range: {0}")]
    InvalidParameter(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("duplicate: {0}")]
    Duplicate(String),

    #[error("model file {path}: line {line}: {message}")]
    ModelFile { path: PathBuf, line: usize, message: String },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Stable machine-readable code, used by the HTTP service and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse_error",
            Error::Schema { .. } => "schema_error",
            Error::Validation(_) => "validation_error",
            Error::UnsupportedEventType(_) => "unsupported_event_type",
            Error::DanglingReference { .. } => "dangling_reference",
            Error::EmptyCorpus => "empty_corpus",
            Error::Contract(_) => "contract_error",
            Error::CatalogMismatch { .. } => "catalog_mismatch",
            Error::DegenerateLabels(_) => "degenerate_labels",
            Error::Convergence { .. } => "convergence_error",
            Error::Undefined(_) => "undefined_metric",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotFound(_) => "not_found",
            Error::Duplicate(_) => "duplicate",
            Error::ModelFile { .. } => "model_file_error",
            Error::Stage { source, .. } => source.code(),
            Error::Io { .. } => "io_error",
            Error::Json(_) => "json_error",
        }
    }
}
