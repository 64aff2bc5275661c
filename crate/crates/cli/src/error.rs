use std::fmt;

/// Exit codes: 0 success, 1 property failure, 2 malformed input, 3 dimension or backend mismatch.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn malformed(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    /// Prefixes the message, typically with the offending file.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<replicheck::Error> for CliError {
    fn from(e: replicheck::Error) -> Self {
        use replicheck::Error::*;
        match e {
            DimensionMismatch(_) | BackendMismatch(_) => Self::mismatch(e.to_string()),
            NonCommuting { .. } => Self {
                code: 1,
                message: e.to_string(),
            },
            _ => Self::malformed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::malformed(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::malformed(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::malformed(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
