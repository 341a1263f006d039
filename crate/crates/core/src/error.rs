use thiserror::Error;

use crate::interval::ValidationReport;

/// Errors raised while building or executing a world.
#[derive(Debug, Error)]
pub enum WorldError {
    #[error("malformed signature: {0}")]
    MalformedSignature(String),

    /// The caller passed an action vector that does not fit the signature.
    /// This is an API error and never an incorrect move.
    #[error("malformed action {action:?}: {reason}")]
    MalformedAction { action: Vec<u32>, reason: String },

    #[error("malformed observation {observation:?}: {reason}")]
    MalformedObservation { observation: Vec<u32>, reason: String },

    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(ValidationReport),

    #[error("malformed noise descriptor: {0}")]
    MalformedNoise(String),

    #[error("malformed world: {0}")]
    MalformedWorld(String),

    #[error("outcomes {first} and {second} of a transition lead to the same cumulative state")]
    CollidingOutcomes { first: usize, second: usize },

    #[error("{what} exceeds the configured cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("the initial Nothing action is not a correct move in the initial state")]
    BlindStartRejected,
}

/// Errors raised by the event language and the local-history machinery.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventError {
    #[error("syntax error at column {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("{0}")]
    Semantic(String),

    #[error("moment {q} is outside the history (1..={len})")]
    MomentOutOfRange { q: usize, len: usize },

    #[error("kind-B events need a local history anchored at the first step")]
    NotOriginAnchored,

    #[error("pattern uses {0} distinct step templates; at most 12 are supported")]
    TooManyTemplates(usize),
}

impl EventError {
    pub(crate) fn syntax(position: usize, message: impl Into<String>) -> Self {
        EventError::Syntax {
            position,
            message: message.into(),
        }
    }
}

/// A history log line that could not be read back.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("log line {line}: {message}")]
pub struct LogError {
    pub line: usize,
    pub message: String,
}

/// A world or agent file that could not be loaded. Syntax errors carry the
/// 1-based line and column; schema errors carry the path of the offending
/// field, such as `transitions[3].outcomes[1]`.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FileError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

impl FileError {
    pub(crate) fn at(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        FileError::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for FileError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_syntax() || e.is_eof() {
            FileError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            FileError::Schema {
                path: format!("line {}", e.line()),
                message: e.to_string(),
            }
        }
    }
}
