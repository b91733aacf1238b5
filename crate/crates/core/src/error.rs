use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no admissible permutation for kind {kind} at n = {n}")]
    NoAdmissiblePermutation { kind: String, n: usize },

    #[error("code construction failed for kappa = {kappa}, target relative distance {target}")]
    ConstructionFailed { kappa: usize, target: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("coordinate {index} = {value} lies outside [-1, 2]")]
    OutOfRange { index: usize, value: f64 },

    #[error("step budget of {steps} exhausted (best residual {residual:e})")]
    BudgetExhausted {
        steps: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("no candidate equilibrium found (best residual {residual:e})")]
    NotFound { residual: f64 },

    #[error("empty support")]
    EmptySupport,

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
