//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, estimation, and inference.
#[derive(Debug, Error)]
pub enum Error {
    /// A spike train violated an invariant (ordering, domain membership).
    #[error("invalid spike train: {0}")]
    InvalidSpikeTrain(String),

    /// A time domain with `t_start >= t_end`.
    #[error("invalid time domain: t_start={0}, t_end={1}")]
    InvalidDomain(f64, f64),

    /// Operands live on different time domains.
    #[error("time domain mismatch: [{0}, {1}] vs [{2}, {3}]")]
    DomainMismatch(f64, f64, f64, f64),

    /// A parameter outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation that needs at least one train got none.
    #[error("empty sample")]
    EmptySample,

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
