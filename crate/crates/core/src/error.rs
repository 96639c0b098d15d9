use thiserror::Error;

use crate::grid::Space;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain mismatch: expected {expected:?}-space wavefunction, got {found:?}")]
    DomainMismatch { expected: Space, found: Space },

    /// A window or envelope violates a support constraint.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// The grid cannot resolve a requested quadrature or feature.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("unknown sweep parameter '{0}'")]
    UnknownParameter(String),

    /// NaN, infinities or a normalisation breach in a result.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
