use thiserror::Error;

/// Errors raised by the numerical operators and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {requested} exceeds the profile's available order {available}")]
    OrderTooHigh { requested: usize, available: usize },

    #[error("radius {r} lies outside the sampled grid [{min}, {max}]")]
    OutOfGrid { r: f64, min: f64, max: f64 },

    #[error("unsupported dimension {0}: only even n >= 4 is supported")]
    UnsupportedDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("radial tail not convergent up to r = {radius}: {detail}")]
    TailNotConvergent { radius: f64, detail: String },

    #[error("Picard iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("iterate density is not integrable: {0}")]
    NonIntegrable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
