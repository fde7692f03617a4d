use std::io;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the range an operation accepts.
    #[error("range error: {0}")]
    Range(String),

    /// A mathematical precondition was violated (e.g. a non-prime modulus).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured resource budget.
    #[error("resource error: {what} exceeds budget {budget}")]
    Resource { what: String, budget: String },

    /// Fewer primes than the operation needs.
    #[error("insufficient primes: {0}")]
    InsufficientPrimes(String),

    /// An exact integer result does not fit in the result type.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A checked identity did not hold.
    #[error("identity violation: {0}")]
    IdentityViolation(String),

    /// A cache or export file was malformed.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn range(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
