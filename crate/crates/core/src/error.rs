//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by induction, word algebra and the entropy solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or rejected input (non-bijective image list, reducible
    /// permutation, inadmissible word junction, zero simplex coordinate, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A measure-zero degeneracy was hit: boundary tie `lambda_m =
    /// lambda_{pi^-1 m}`, vanishing `a_m(delta)`, or a collapsed orbit.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iteration cap or simulation horizon was exhausted before the
    /// requested event occurred.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    /// A solver failed to reach the requested tolerance or diverged.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// Process exit code convention: 2 invalid input, 3 numeric/degenerate,
    /// 4 horizon or cap exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Degenerate(_) | Error::Numeric(_) => 3,
            Error::CapExceeded(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
