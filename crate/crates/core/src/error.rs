use std::fmt;

use thiserror::Error;

/// Bookkeeping attached to a failed adaptive quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    pub context: String,
    pub estimate: f64,
    pub error: f64,
    pub tolerance: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

impl fmt::Display for QuadratureFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: estimate {:e} with error {:e} > tolerance {:e} after {} intervals ({} evaluations)",
            self.context, self.estimate, self.error, self.tolerance, self.intervals, self.evaluations
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(QuadratureFailure),

    #[error("invalid dataset field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Domain(_) | Error::Shape(_) => 2,
            Error::Schema { .. }
            | Error::Data(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 3,
            Error::NonConvergence(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
