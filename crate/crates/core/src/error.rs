use thiserror::Error;

/// Errors shared by all solver, loss, and data modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "marginal component {index} is not strictly positive; \
         standard-domain Sinkhorn cannot handle zero mass, use sinkhorn_log"
    )]
    NonPositiveMass { index: usize },

    #[error(
        "non-finite intermediate while scaling exp(-C/epsilon); \
         the kernel under/overflowed, use sinkhorn_log"
    )]
    NonFiniteIntermediate,

    #[error("epsilon {epsilon} is below the supported log-domain floor {floor}")]
    EpsilonTooSmall { epsilon: f64, floor: f64 },

    #[error("unsupported instance for the exact solver: {0}")]
    UnsupportedInstance(String),

    #[error("embeddings line {line}: malformed record: {message}")]
    MalformedEmbeddingRecord { line: usize, message: String },

    #[error("embeddings line {line}: expected dimension {expected}, found {found}")]
    InconsistentEmbeddingDimension {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("embeddings line {line}: duplicate token `{token}`")]
    DuplicateEmbeddingToken { line: usize, token: String },

    #[error("embeddings line {line}: token `{token}` has a zero-norm vector")]
    ZeroNormEmbedding { line: usize, token: String },

    #[error("embedding stream is empty, no dimension can be inferred")]
    EmptyEmbeddingStream,

    #[error("token `{token}` of label `{label}` is missing from the embedding table")]
    MissingToken { token: String, label: String },

    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("csv line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
