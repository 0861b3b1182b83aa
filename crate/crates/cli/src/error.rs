use arvcanon::coefficients::file::FileError;
use arvcanon::Error;
use serde_json::json;

/// Failure of a run, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable file or malformed text; exit code 2.
    Parse { message: String, key: Option<String> },
    /// Inputs that parse but violate a precondition; exit code 3.
    Validation(String),
    /// A computation ran out of its length, step or range budget; exit code 1.
    Budget(String),
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self::Parse { message: message.into(), key: None }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Budget(_) => 1,
            Self::Parse { .. } => 2,
            Self::Validation(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let value = match self {
            Self::Parse { message, key } => json!({"error": "parse", "key": key, "message": message}),
            Self::Validation(message) => json!({"error": "validation", "message": message}),
            Self::Budget(message) => json!({"error": "budget", "message": message}),
        };
        value.to_string()
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Parse { ref key, .. } => Self::Parse { key: Some(key.clone()), message: e.to_string() },
            FileError::Io { .. } => Self::parse(e.to_string()),
            FileError::Invalid(_) => Self::Validation(e.to_string()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } | Error::StepUnderflow(_) | Error::Overflow | Error::NoLimit { .. } => {
                Self::Budget(e.to_string())
            }
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::parse(format!("cannot write output: {e}"))
    }
}
