use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("partial quotient a_{index} is not defined by the spec (explicit prefix has {len} terms)")]
    IndexBeyondSpec { index: usize, len: usize },

    #[error("precision exhausted while resolving {quantity}")]
    PrecisionExhausted { quantity: String },

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("invalid alpha spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at `{token}`: {message}")]
    Parse { token: String, message: String },

    #[error("shadowing guard tripped: {0}")]
    ShadowingGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn precision(quantity: impl Into<String>) -> Self {
        Error::PrecisionExhausted { quantity: quantity.into() }
    }

    pub fn parse(token: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { token: token.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
