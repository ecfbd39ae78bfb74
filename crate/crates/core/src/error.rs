use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("symmetric eigen-solver did not converge")]
    EigenNonConvergence,

    #[error("largest eigenvalue is not simple (gap {gap:e} below threshold {threshold:e})")]
    DegenerateTopEigenvalue { gap: f64, threshold: f64 },

    #[error("interval family has {free} free entries; vertex enumeration is capped at {cap}")]
    TooManyVertices { free: usize, cap: usize },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("gradient norm {0:e} vanished while the constraint is violated")]
    ZeroGradient(f64),

    #[error("family member {index} is not Hurwitz")]
    NonHurwitzInput { index: usize },

    #[error("Q must be symmetric positive definite (smallest eigenvalue {0:e})")]
    QNotPositiveDefinite(f64),

    #[error("malformed input: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
