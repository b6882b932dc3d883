use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NonPositiveMatrix(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unphysical state: smallest symplectic eigenvalue {nu_minus} < 1 (tolerance {tol:e})")]
    UnphysicalState { nu_minus: f64, tol: f64 },

    #[error("matrix deviates from standard form by {residual:e} (tolerance {tol:e})")]
    StructureViolation { residual: f64, tol: f64 },

    #[error("no sign change of the log-ratio on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("bisection did not converge within {0} iterations")]
    MaxIterations(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
