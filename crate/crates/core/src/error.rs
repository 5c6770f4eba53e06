//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("rank-deficient matrix: {0}")]
    RankDeficient(String),

    #[error("factorization did not converge within {max_iter} iterations")]
    FactorizationFailed { max_iter: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("enumeration dimension {dim} exceeds cap {cap}")]
    CapacityExceeded { dim: usize, cap: usize },

    #[error("no lattice point within radius {radius}")]
    RadiusExceeded { radius: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("trial invariant violated (seed {seed}): {detail}")]
    TrialInvariant { seed: u64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonSquare { .. }
            | Error::DimensionMismatch(_)
            | Error::InvalidArgument(_)
            | Error::InvalidConfig(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
