use std::path::{Path, PathBuf};

use serde::Serialize;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: invalid scenario:\n  {}", .violations.join("\n  "))]
    InvalidScenario { path: PathBuf, violations: Vec<String> },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] beampredict_core::Error),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn json(path: &Path, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        Error::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
            Error::Format { .. } => "format",
            Error::InvalidScenario { .. } => "invalid_scenario",
            Error::Config(_) => "config",
            Error::Core(_) => "core",
        }
    }

    /// Machine-readable form printed on failure.
    pub fn record(&self, command: &str) -> ErrorRecord {
        let (path, details) = match self {
            Error::Io { path, .. } | Error::Json { path, .. } | Error::Csv { path, .. } | Error::Format { path, .. } => {
                (Some(path.display().to_string()), Vec::new())
            }
            Error::InvalidScenario { path, violations } => (Some(path.display().to_string()), violations.clone()),
            Error::Config(_) | Error::Core(_) => (None, Vec::new()),
        };
        ErrorRecord {
            status: "error",
            command: command.to_string(),
            kind: self.kind(),
            message: self.to_string(),
            path,
            details,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub command: String,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}
