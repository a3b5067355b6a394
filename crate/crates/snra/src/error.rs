//! Crate-wide error type.

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by reward operators, verifiers, environments, the trainer
/// and the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation
    /// (negative error, out-of-range bin index, non-permutation input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violated an invariant at construction time.
    #[error("invalid config field `{field}`: {message}")]
    InvalidField { field: String, message: String },

    /// A config file contained a key that is not part of the schema.
    #[error("unknown config key `{key}`{}", suggestion_suffix(.suggestion))]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
    },

    /// The optimizer produced a non-finite loss; training was aborted.
    #[error("training diverged at step {step}: {detail}")]
    Diverged { step: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn field(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

fn suggestion_suffix(suggestion: &Option<String>) -> String {
    match suggestion {
        Some(s) => format!(", did you mean `{s}`?"),
        None => String::new(),
    }
}
