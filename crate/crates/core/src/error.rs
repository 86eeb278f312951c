//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum QecError {
    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unitary (max deviation {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("Kraus channel violates completeness (max deviation {defect:e})")]
    IncompleteChannel { defect: f64 },

    #[error("dimension {dim} is not a power of two")]
    NotPowerOfTwo { dim: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("syndrome collision: errors {first} and {second} share syndrome {syndrome:b} with inequivalent residuals")]
    SyndromeCollision {
        syndrome: usize,
        first: String,
        second: String,
    },

    #[error("recovery derivation failed: {0}")]
    RecoveryDerivation(String),

    #[error("stabilizer synthesis failed: {0}")]
    StabilizerSynthesis(String),

    #[error("code is already augmented")]
    AlreadyAugmented,

    #[error("augment is only defined for single-level codes; concatenated variants are built directly")]
    AugmentConcatenated,

    #[error("unknown code label {0:?}")]
    UnknownCode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, QecError>;
