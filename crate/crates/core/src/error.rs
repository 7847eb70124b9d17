use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid measurement design: {0}")]
    InvalidDesign(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("probability {0} is outside (0, 1)")]
    InvalidProbability(f64),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {need} snapshots, got {got}")]
    InsufficientSnapshots { got: usize, need: usize },

    #[error(
        "fitting-error constraint infeasible: smallest attainable residual {min_fit:.6e} exceeds threshold {eta:.6e}"
    )]
    InfeasibleConstraint { min_fit: f64, eta: f64 },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("model order {k} must be in 1..{dim}")]
    InvalidRank { k: usize, dim: usize },

    #[error("retrieval failure: {0}")]
    RetrievalFailure(String),
}
