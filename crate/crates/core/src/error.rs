use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("unphysical: {0}")]
    Unphysical(String),

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for failures of a numerical routine (bisection, quadrature, overflow), as
    /// opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Bracket(_) | Error::Quadrature(_) | Error::NonFinite(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
