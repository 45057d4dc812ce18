use thiserror::Error;

use crate::voting::Outcome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown outcome `{0}`")]
    UnknownOutcome(Outcome),
    #[error("duplicate outcome `{0}`")]
    DuplicateOutcome(Outcome),
    #[error("invalid outcome name {0:?}: names must be non-empty and contain no whitespace")]
    InvalidName(String),
    #[error("at least 2 outcomes are required, got {0}")]
    TooFewOutcomes(usize),
    #[error("{got} outcomes exceed the supported maximum of {max}")]
    TooManyOutcomes { got: usize, max: usize },
    #[error("orders rank different outcome sets")]
    OutcomeSetMismatch,
    #[error("profile has no votes")]
    EmptyProfile,
    #[error("invalid scoring rule: {0}")]
    InvalidRule(String),
    #[error("index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("no outcome other than `{excluded}` in the other party's top {iteration}")]
    NoEligiblePivot { iteration: usize, excluded: Outcome },
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("search too large: {0}")]
    LimitExceeded(String),
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
