use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("index {index} out of range (maximum {max})")]
    OutOfRange { index: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A computed quantity violated an invariant the construction guarantees;
    /// always a bug in the inputs or in the construction itself.
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
