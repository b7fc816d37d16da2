//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally inconsistent inputs (lengths, shapes, indices).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input violates a documented invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation produced a non-finite value where a finite one is required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// The simulator exhausted its retry budget for a valid observation mask.
    #[error("simulation failed: {0}")]
    Simulation(String),

    /// A sampler sweep failed; carries the 1-based sweep index.
    #[error("sweep {sweep}: {source}")]
    Sweep {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },

    /// Operation requires a non-empty posterior chain.
    #[error("empty posterior chain")]
    EmptyChain,
}

impl Error {
    pub(crate) fn at_sweep(self, sweep: usize) -> Error {
        Error::Sweep {
            sweep,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
