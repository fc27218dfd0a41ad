use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("invalid problem spec: {0}")]
    InvalidSpec(String),

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("safeguard unsatisfiable: {0}")]
    UnsatisfiableSafeguard(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direction is not a descent direction for the batch (dᵀg = {dtg:e})")]
    NonDescent { dtg: f64 },

    /// Every trial in `trials` failed the sufficient-decrease test.
    #[error("line search stalled after {} trial steps (last alpha = {last_alpha:e})", trials.len())]
    Stall {
        last_alpha: f64,
        trials: Vec<LineSearchTrial>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("undefined estimate: {0}")]
    Undefined(String),

    #[error("unsupported for this problem: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One rejected (or accepted) trial of the backtracking search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchTrial {
    pub alpha: f64,
    pub f_trial: f64,
    pub rhs: f64,
}
