use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid parameter M must be at least 2, got {0}")]
    GridTooSmall(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A caller broke a documented precondition (e.g. storing a pair with `sᵀy ≤ 0`).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dense operator of dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("line search failed: {0}")]
    LineSearch(#[from] crate::linesearch::LineSearchError),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("state solver did not converge after {iterations} iterations (residual {residual:e})")]
    StateSolve { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
