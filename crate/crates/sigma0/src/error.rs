use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Input violates an operation's precondition.
    Precondition(String),
    /// A bounded search ran out of budget before it could decide.
    SearchExhausted { what: String, bound: u64 },
    /// A computed certificate failed exact verification.
    Inconsistent(String),
    /// Intermediate integers left the supported range.
    Overflow,
    Unsupported(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Precondition(m) => write!(f, "precondition failed: {m}"),
            Error::SearchExhausted { what, bound } => {
                write!(f, "search exhausted: {what} (bound {bound})")
            }
            Error::Inconsistent(m) => write!(f, "inconsistent result: {m}"),
            Error::Overflow => f.write_str("integer overflow in exact arithmetic"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl core::error::Error for Error {}
