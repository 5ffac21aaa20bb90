use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("right-hand side has component {magnitude:e} on the excluded shell |k|² = {shell}")]
    NotInRange { shell: u32, magnitude: f64 },

    #[error("near-degenerate divisor {divisor:e} for mode {index:?}")]
    NearDegenerate { index: Vec<u32>, divisor: f64 },

    #[error("profile is not strictly positive (minimum {min:e} at t = {at:?})")]
    NonPositive { min: f64, at: Vec<f64> },

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("trace projection residual {residual:e} exceeds {limit:e}")]
    Aliasing { residual: f64, limit: f64 },

    #[error("Newton did not converge after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
