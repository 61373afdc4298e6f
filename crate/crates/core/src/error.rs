use thiserror::Error;

/// Errors raised by state construction, kernels and the protocol engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tail population {mass:e} at index {index} is not below threshold {threshold:e}; raise the truncation")]
    TailMassExceeded {
        index: usize,
        mass: f64,
        threshold: f64,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dense propagator of dimension {dim} exceeds the limit of {limit}")]
    TruncationTooLarge { dim: usize, limit: usize },

    #[error("post-selected branch vanished at cycle {cycle} (success probability {probability:e})")]
    VanishingBranch { cycle: usize, probability: f64 },

    #[error("degenerate target: {0}")]
    DegenerateTarget(String),

    #[error("inconsistent strategy: {0}")]
    InconsistentStrategy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
