//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    CompositeCharacteristic(u64),
    #[error("field too large: {0}")]
    FieldTooLarge(String),
    #[error("supplied modulus is invalid: {0}")]
    BadModulus(String),
    #[error("supplied basis is not linearly independent over the subfield")]
    DependentBasis,
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("discrete logarithm of zero is undefined")]
    DlogOfZero,
    #[error("zero function not allowed here")]
    ZeroFunction,
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid restricted set: {0}")]
    BadDigitSet(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("root-of-unity orders differ: {0} vs {1}")]
    OrderMismatch(u64, u64),
    #[error("accumulator order {0} exceeds the supported maximum")]
    AccumulatorTooLarge(u128),
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("gate failed: {0}")]
    GateFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
