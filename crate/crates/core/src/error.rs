use thiserror::Error;

use crate::checks::Witness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point {point:?} is outside the domain with sizes {sizes:?}")]
    OutOfDomain { point: Vec<i64>, sizes: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Enumeration was requested on a domain above the configured cap.
    /// `points` is `None` when the point count overflows `usize`.
    #[error("domain has {} points, above the brute-force cap of {cap}", points.map_or_else(|| "too many".to_string(), |p| p.to_string()))]
    CapExceeded { points: Option<usize>, cap: usize },

    #[error("{what} failed validation: {witness}")]
    Validation { what: String, witness: Witness },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("no curvature bound available for f on a domain of {points} points; supply lambda explicitly")]
    MissingLambda { points: usize },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
