use serde_json::json;
use thiserror::Error;

use crate::spec::Command;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("value out of range at `{key}`: {reason}")]
    Range { key: String, reason: String },
    #[error("command `{command}` needs `{field}`")]
    Missing { command: &'static str, field: String },
    #[error(transparent)]
    Core(#[from] fieldroad::Error),
    #[error("cannot write `{path}`: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn range(key: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Range { key: key.into(), reason: reason.into() }
    }

    pub(crate) fn missing(command: Command, field: &str) -> Self {
        CliError::Missing { command: command.name(), field: field.into() }
    }

    /// Parameter errors of the library become range errors under `prefix`.
    pub(crate) fn from_core(prefix: &str, e: fieldroad::Error) -> Self {
        match e {
            fieldroad::Error::InvalidParameter { name, reason } => {
                let key = if prefix.is_empty() { name } else { format!("{prefix}.{name}") };
                CliError::Range { key, reason }
            }
            other => CliError::Core(other),
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "schema",
            CliError::Range { .. } => "range",
            CliError::Missing { .. } => "missing",
            CliError::Core(_) => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let key = match self {
            CliError::Schema { path, .. } => Some(path.clone()),
            CliError::Range { key, .. } => Some(key.clone()),
            CliError::Missing { field, .. } => Some(field.clone()),
            _ => None,
        };
        json!({ "error": { "kind": self.kind(), "key": key, "message": self.to_string() } })
    }
}
