use alloc::string::String;

/// Errors raised by constructors and builders.
///
/// Verifiers never return `Err` for a failed identity; they return a
/// [`crate::verdict::Verdict`] carrying a witness instead. Errors are reserved
/// for inputs that violate a precondition.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// An instance, solution or parameter outside the problem's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A guarantee produced a negative slack entry.
    #[error("guarantee violation at instance {instance}, solution {solution}: slack {value}")]
    GuaranteeViolation {
        instance: String,
        solution: String,
        value: String,
    },
    /// A documented precondition of an operation does not hold.
    #[error("contract error: {0}")]
    Contract(String),
    /// Input is larger than the configured exhaustive-search limit.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// Division by zero or a degenerate parameter choice.
    #[error("division error: {0}")]
    Division(String),
    /// A problem failed one of the admissibility properties.
    #[error("admissibility violation: {0}")]
    Admissibility(String),
    /// An LP proof does not satisfy its defining conditions.
    #[error("invalid proof: {0}")]
    ProofInvalid(String),
    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! contract {
    ($($arg:tt)*) => { $crate::error::Error::Contract(alloc::format!($($arg)*)) };
}
pub(crate) use contract;
pub(crate) use domain;
