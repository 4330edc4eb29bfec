use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// An input lies outside the domain of the operation (non-Hermitian
    /// operator, unnormalized state, broken weight normalization, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed graph data such as a dangling vertex reference.
    #[error("structural error: {0}")]
    Structural(String),
    /// Two routes to the same object disagree beyond tolerance.
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
