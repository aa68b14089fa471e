use std::fmt;

use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags or configuration. Exit code 2.
    Usage,
    /// Unreadable input or a failed computation. Exit code 1.
    Data,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    /// Offending flag for usage errors.
    pub flag: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn usage(flag: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            flag: Some(flag.into()),
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            flag: None,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
        };
        json!({
            "schema_version": crate::render::SCHEMA_VERSION,
            "error": { "kind": kind, "flag": self.flag, "message": self.message },
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.flag {
            Some(flag) => write!(f, "{flag}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for CliError {}

impl From<groupfx_core::Error> for CliError {
    fn from(e: groupfx_core::Error) -> Self {
        CliError::data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
