use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid principal universe: {0}")]
    InvalidUniverse(String),
    #[error("unknown principal {0:?}")]
    UnknownPrincipal(String),
    #[error("label is not drawn from this universe")]
    UniverseMismatch,
    #[error("label is not a member of the given set")]
    NotInSet,
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("input space has {elements} labeled elements, above the limit of {limit}")]
    UniverseTooLarge { elements: usize, limit: usize },
    #[error("fuel exhausted while evaluating input {input}; verdict is inconclusive")]
    Inconclusive { input: String },
    #[error("no terminating candidate is equivalent to the input at level {level}")]
    NoCandidate { level: String },
    #[error("value {0} is outside the declared value universe")]
    ValueOutsideUniverse(u64),
    #[error("test sequence exceeded its budget of {budget} tests")]
    BudgetExceeded { budget: usize },
    #[error("{0}")]
    Precondition(String),
    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },
}
