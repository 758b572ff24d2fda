use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("parities are linearly dependent")]
    Dependent,
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("frequency {0} is not orthogonal to the coset parities")]
    NotInSubspace(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension {n} exceeds the stored-set cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("rejection sampling stalled after {0} draws")]
    RejectionStall(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
