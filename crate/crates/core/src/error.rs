use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("resource limit exceeded: {what} needs {requested}, limit is {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("{0} is not representable as a finite f64")]
    Unrepresentable(&'static str),

    #[error("series did not reach the requested tolerance within {0} terms")]
    NoConvergence(u64),
}

macro_rules! domain {
    ($($arg:tt)*) => {
        $crate::Error::Domain(::alloc::format!($($arg)*))
    };
}
pub(crate) use domain;
