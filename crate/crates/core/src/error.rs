use thiserror::Error;

/// Errors raised by the beamforming and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must agree in length or grid do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Exhaustive search would visit more candidates than the configured ceiling.
    #[error("exhaustive search needs {candidates} candidates, above the ceiling of {ceiling}")]
    Capacity { candidates: u128, ceiling: u128 },

    /// The Golay doubling construction only yields power-of-two lengths.
    #[error("no complementary construction for length {0} (must be a power of two)")]
    UnsupportedLength(usize),

    /// The MMSE system matrix could not be inverted.
    #[error("singular channel: H = 0 with zero noise variance")]
    Singular,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
