//! Library error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension {0}: mutually unbiased bases are built for prime-power dimensions only")]
    UnsupportedDimension(usize),

    #[error("degenerate effect: Tr(E^2) = 0")]
    DegenerateEffect,

    #[error("measurement kind not accepted here: {0}")]
    InvalidMeasurementKind(String),

    #[error("scenario too large for exhaustive enumeration: {strategies} strategy pairs")]
    TooLargeScenario { strategies: f64 },

    #[error("operation needs {expected} outcomes per setting, scenario has {found}")]
    UnsupportedOutcomes { expected: usize, found: usize },

    #[error("data do not violate the inequality even at unit efficiency")]
    NotViolatedAtAnyEfficiency,

    #[error("iterate has no positive eigenvalue")]
    DegenerateIterate,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
