use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Position inside a text input, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextPos {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for TextPos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("parse error at {pos}: {message}")]
    Parse { pos: TextPos, message: String },

    #[error("invalid scalar `{0}`")]
    InvalidScalar(String),

    #[error("scalar `{0}` is not in the rational field")]
    NotRational(String),

    #[error("input sequence is empty")]
    EmptyInput,

    #[error("attention window {start}..{end} is empty or outside a sequence of length {len}")]
    BadWindow { start: usize, end: usize, len: usize },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{name}` is not defined for length {len}")]
    PredicateUndefined { name: String, len: usize },

    #[error("conflicting definitions for predicate `{0}`")]
    PredicateConflict(String),

    #[error("position {position} out of range for a sequence of length {len}")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("machine has no acceptance vector")]
    MissingAcceptVector,

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("resource cap exceeded: {what} would exceed {cap}")]
    ResourceCap { what: String, cap: usize },

    #[error("integrity violation at position {position}: {satisfied} conditions hold for input {witness}")]
    Integrity {
        position: usize,
        satisfied: usize,
        witness: String,
    },

    #[error("{what} disagree on {witness}")]
    Disagreement { what: String, witness: String },

    #[error("inequality system has no solution")]
    NoSolution,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    /// True for errors caused by a configured resource cap.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::ResourceCap { .. })
    }
}
