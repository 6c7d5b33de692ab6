use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or generator was handed an out-of-range parameter.
    #[error("invalid parameter `{field}`: {message}")]
    Parameter { field: String, message: String },

    /// A graph file or in-memory graph failed structural validation.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// A malformed LP model (empty row, nonpositive threshold, ...).
    #[error("malformed LP: {0}")]
    Model(String),

    /// A primal/dual pair that does not certify what it claims to.
    #[error("invalid certificate: {0}")]
    Certificate(String),

    /// A stated precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Learner state was queried before it was populated.
    #[error("invalid state: {0}")]
    State(String),

    /// A bad experiment configuration.
    #[error("invalid config `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parameter(field: &str, message: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
