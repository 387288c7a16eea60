use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution function: {0}")]
    InvalidDistribution(String),

    #[error("not a distance distribution function: {0}")]
    NotDistance(String),

    #[error("invalid tolerance {0}: must lie in [1e-15, 1e-6]")]
    InvalidTolerance(f64),

    #[error("PM space axiom ({axiom}) violated: {witness}")]
    Axiom { axiom: u8, witness: String },

    #[error("invalid metric table: {0}")]
    InvalidMetric(String),

    #[error("unknown point {0:?}")]
    UnknownPoint(String),

    #[error("invalid lambda sequence: {0}")]
    InvalidLambda(String),

    #[error("invalid set description: {0}")]
    InvalidSet(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("horizon {horizon} too small: {detail}")]
    HorizonTooSmall { horizon: u64, detail: String },

    /// An internal invariant failed. This is a bug, never an
    /// expected outcome.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
