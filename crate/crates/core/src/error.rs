use thiserror::Error;

/// Errors produced by the flows, the analysis routines and the file front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrated state stopped being finite. Distinct from a point dying.
    #[error("numerical overflow at time {time}")]
    Overflow { time: f64 },

    /// The backward flow reached the pole of its vector field.
    #[error("backward flow hit the singularity at u = {u} (|A| = {modulus:e})")]
    Singularity { u: f64, modulus: f64 },

    /// Two computations that must agree did not.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("invalid driver specification: {0}")]
    Spec(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
