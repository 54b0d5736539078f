use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its type invariant.
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },

    /// An argument lies outside the domain of the operation.
    #[error("{what} = {value} is outside the domain: {reason}")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("kernel {0} has no pointwise value")]
    UnsupportedKernel(&'static str),

    /// The requested combination has no closed form here; use the grid oracle.
    #[error("no closed form for {0}")]
    NoClosedForm(String),

    #[error("unbounded solution: {0}")]
    Unbounded(String),

    #[error("euler residual {residual:e} exceeds relative tolerance {tolerance:e}")]
    ResidualCheck { residual: f64, tolerance: f64 },

    #[error("assembled matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that signal a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::ResidualCheck { .. } | Error::NotPositiveDefinite { .. }
        )
    }
}
