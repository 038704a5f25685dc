use thiserror::Error;

/// Errors raised while validating inputs or running the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScnError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected {expected} neighborhoods for tier {tier}, got {actual}")]
    WrongAgentCount {
        tier: usize,
        expected: usize,
        actual: usize,
    },

    #[error("agent {agent} of tier {tier} links to index {index}, outside 1..={bound}")]
    IndexOutOfRange {
        tier: usize,
        agent: usize,
        index: usize,
        bound: usize,
    },

    #[error("agent {agent} of tier {tier} lists supplier {index} more than once")]
    DuplicateLink { tier: usize, agent: usize, index: usize },

    #[error("operation requires a {required} network, got {actual}")]
    DimensionMismatch { required: String, actual: String },

    #[error("search space too large: {what}")]
    TooLarge { what: String },

    #[error("undefined regime: {0}")]
    UndefinedRegime(&'static str),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, ScnError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ScnError {
    ScnError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
