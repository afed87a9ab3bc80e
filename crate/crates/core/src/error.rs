use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("shape mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },

    #[error("unsupported driving regime m={m}, n={n}: closed forms require m > n")]
    UnsupportedRegime { m: u32, n: u32 },

    #[error("integration failed at t={t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("quadrature oracle did not converge: {0}")]
    OracleFailure(String),

    #[error("internal logic error: {0}")]
    Logic(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
