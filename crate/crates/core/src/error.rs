use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime base")]
    NotPrime(u32),
    #[error("polynomial {0} is reducible")]
    Reducible(u64),
    #[error("polynomial {code} has degree {found:?}, expected {expected}")]
    WrongDegree {
        code: u64,
        expected: u32,
        found: Option<u32>,
    },
    #[error("polynomial {0} does not generate the multiplicative group")]
    NotGenerator(u64),
    #[error("{0} is not an element of the multiplicative group")]
    NotInGroup(u64),
    #[error("value does not fit in 64 bits: {0}")]
    Overflow(&'static str),
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("work estimate {estimate} exceeds budget {budget} ({what})")]
    OverBudget {
        what: &'static str,
        estimate: u128,
        budget: u128,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
