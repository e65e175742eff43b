use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} is not faithful (smallest symplectic eigenvalue {smallest})")]
    NotFaithful { what: String, smallest: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("channel is not completely positive (min eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("oracle precision: {0}")]
    OraclePrecision(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
