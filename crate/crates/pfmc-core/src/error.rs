//! Error taxonomy: validation failures (malformed inputs) and capacity
//! guards (brute-force paths asked to enumerate beyond their limits).

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input violates a documented precondition or invariant.
    #[error("{0}")]
    Validation(String),
    /// An enumeration guard was exceeded; `hint` names the scalable path.
    #[error("capacity guard exceeded: {what} = {requested} > {guard} ({hint})")]
    Capacity {
        what: &'static str,
        requested: usize,
        guard: usize,
        hint: &'static str,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
