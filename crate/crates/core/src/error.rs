use thiserror::Error;

use crate::speclang::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("feature vector must have at least one entry")]
    EmptyFeatureVector,

    #[error("non-finite feature value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("box {cluster} has no held-out evidence")]
    NoEvidence { cluster: String },

    #[error("region received no probability mass in {draws} draws")]
    NoMass { draws: usize },

    #[error("seed stream reuse: {0}")]
    SeedReuse(String),

    #[error("no guarantee available for atom `{0}`")]
    MissingGuarantee(String),

    #[error("atom `{0}` occurs with conflicting annotations")]
    ConflictingAnnotation(String),

    #[error("missing prediction for profiled input `{0}`")]
    MissingPrediction(String),

    #[error("position {position} out of range for trace of length {len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: unsupported format version `{found}` (expected `{expected}`)")]
    Version {
        path: String,
        found: String,
        expected: String,
    },

    #[error("{path}: content digest mismatch")]
    Digest { path: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
