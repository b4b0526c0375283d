use thiserror::Error;

/// Errors raised by the library.
///
/// Verification failures of theorem-backed constructions surface as
/// [`Error::Internal`]; data conditions that merely fail a check are returned
/// as ordinary results instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("budget exceeded for {what}: need {needed}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn budget(what: &'static str, needed: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::BudgetExceeded {
            what,
            needed: needed.into(),
            limit: limit.into(),
        }
    }
}
