use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix has no entries ({rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("SVD did not converge for a {rows}x{cols} matrix within the backend iteration limit")]
    SvdNoConvergence { rows: usize, cols: usize },

    #[error("matrix is rank deficient: sigma_min = {sigma_min:e} <= cutoff {cutoff:e}")]
    RankDeficient { sigma_min: f64, cutoff: f64 },

    #[error("Gram inverse requires n <= d, got a {rows}x{cols} matrix")]
    NotWide { rows: usize, cols: usize },

    #[error("new sample lies in the rowspace: ||Proj_perp(x)|| = {norm:e} <= cutoff {cutoff:e}")]
    SingularIncrement { norm: f64, cutoff: f64 },

    #[error("gradient descent did not converge in {steps} steps (gradient norm {grad_norm:e})")]
    NotConverged { steps: usize, grad_norm: f64 },

    #[error("step size {step:e} must be positive and below 1/s1^2 = {limit:e}")]
    InvalidStepSize { step: f64, limit: f64 },

    #[error("{what} = {value} is outside the domain {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("only {valid} usable trials out of {requested} (need at least 2)")]
    TooFewTrials { valid: usize, requested: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
