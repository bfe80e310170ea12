use alloc::string::String;

/// Errors reported by the solvers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("argument outside the dual domain: {0}")]
    DomainError(String),
    #[error("no convergence after {iterations} iterations (best lambda {best_lambda:e})")]
    NoConvergence { iterations: usize, best_lambda: f64 },
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}
