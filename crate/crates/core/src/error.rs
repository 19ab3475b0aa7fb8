use thiserror::Error;

/// Errors raised by the codelength and inference routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested causal model has no member for these arities
    /// (e.g. a directed model over a constant column).
    #[error("model inapplicable: {0}")]
    ModelInapplicable(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unknown scenario: {0}")]
    UnknownScenario(String),

    #[error("generator gave up after {0} attempts")]
    RetriesExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
