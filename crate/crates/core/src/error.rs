use thiserror::Error;

/// Errors raised while reading or validating agent inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// The input is not well-formed. `line` is 1-based.
    #[error("{source_name}: line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    /// The input parsed but breaks an invariant.
    #[error("{source_name}: {message}")]
    Validation {
        source_name: String,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn validation(source_name: &str, message: impl Into<String>) -> Self {
        Error::Validation {
            source_name: source_name.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn from_json(source_name: &str, err: serde_json::Error) -> Self {
        if err.is_io() {
            return Error::Io(err.into());
        }
        Error::parse(source_name, err.line(), strip_position(&err.to_string()))
    }

    /// True for malformed or invariant-breaking input, false for I/O failures.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

// serde_json appends " at line L column C"; the line is already carried separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(idx) => msg[..idx].to_string(),
        None => msg.to_string(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
