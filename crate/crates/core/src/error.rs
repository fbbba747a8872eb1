use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rank {0}: su(n) requires n >= 2")]
    InvalidRank(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("norm diverged: {0}")]
    Diverged(String),

    #[error("insufficient resolution: tail Fourier mass {tail:.3e} above mode {mode} (try N = {suggested})")]
    Resolution { tail: f64, mode: usize, suggested: usize },

    #[error("loop is not splittable at the requested points (value residual {value:.3e}, derivative residual {derivative:.3e})")]
    NotSplittable { value: f64, derivative: f64 },

    #[error("verification failed for {what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}{}", at.map(|t| format!(" (worst at {t})")).unwrap_or_default())]
    Verification {
        what: String,
        residual: f64,
        tolerance: f64,
        at: Option<f64>,
    },

    #[error("Fock space dimension {estimate} exceeds the limit {limit}")]
    Capacity { estimate: usize, limit: usize },

    #[error("mode {mode} is outside the window |m| <= {window}")]
    OutOfWindow { mode: i64, window: i64 },

    #[error("quadrature did not converge: achieved error estimate {estimate:.3e}, target {target:.3e}")]
    Accuracy { estimate: f64, target: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid soliton: jump varies along the path by {0:.3e}")]
    InvalidSoliton(f64),

    #[error("configuration error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
