use thiserror::Error;

/// Errors raised by field construction, basis lookup and state mechanics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("characteristic 2 is not supported: the control permutation degenerates to the identity")]
    EvenCharacteristic,
    #[error("field degree must be at least 1, got {0}")]
    InvalidDegree(u32),
    #[error("field order {p}^{m} exceeds the supported maximum of {max}")]
    FieldTooLarge { p: u32, m: u32, max: usize },
    #[error("element index {index} out of range for a field of order {order}")]
    ElementOutOfRange { index: usize, order: usize },
    #[error("element does not belong to this field")]
    ForeignElement,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("basis index {k} or vector index {t} out of range for d = {d}")]
    BasisIndex { k: usize, t: usize, d: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state is not normalized (norm squared {0})")]
    NotNormalized(f64),
    #[error("outcome probabilities sum to {0}, state is corrupted")]
    CorruptedState(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
