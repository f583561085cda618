use thiserror::Error;

/// Errors raised while building or analysing a decimation filter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected {expected} zero rotations for order {order} and D={decimation}, got {got}")]
    RotationCount {
        order: usize,
        decimation: usize,
        expected: usize,
        got: usize,
    },

    #[error("rotation q={0} is outside [-1, 1]")]
    RotationRange(f64),

    #[error("decimation factor {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("rotation set {0:?} lacks the +/- symmetry needed for the product form")]
    AsymmetricRotations(Vec<f64>),

    #[error("polynomial division left remainder {0:e}")]
    NonZeroRemainder(f64),

    #[error("imaginary residue {0:e} exceeds tolerance")]
    ImaginaryResidue(f64),

    #[error("non-recursive section is empty (polyphase index covers the whole cascade)")]
    EmptyCascade,

    #[error("zero {index} is repeated or degenerate (|dH/dz| = {magnitude:e})")]
    DegenerateZero { index: usize, magnitude: f64 },

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        max_residual: f64,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GcfError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(GcfError::InvalidParameter(msg.into()))
}
