use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("{what} needs {requested} but the {budget} budget allows {limit}")]
    BudgetExceeded {
        what: &'static str,
        budget: &'static str,
        requested: u128,
        limit: u64,
    },

    #[error("series did not converge within {k_max} terms at relative tolerance {tol:e}")]
    NonConvergence { k_max: usize, tol: f64 },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("malformed set file: {0}")]
    SetFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for refusals caused by a configured resource limit rather than by
    /// a bad input.
    pub fn is_resource_refusal(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
