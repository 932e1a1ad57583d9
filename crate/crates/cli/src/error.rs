use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] placeability::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "ParseError",
            Self::Io { .. } => "IoError",
            Self::Config(_) => "ConfigError",
            Self::Core(e) => e.kind(),
        }
    }

    pub fn to_report(&self) -> ErrorReport {
        let (path, line) = match self {
            Self::Parse { path, line, .. } => (Some(path.display().to_string()), Some(*line)),
            Self::Io { path, .. } => (Some(path.display().to_string()), None),
            _ => (None, None),
        };
        let diagnostics = match self {
            Self::Core(placeability::Error::NoFeasiblePair(d)) => Some((**d).clone()),
            _ => None,
        };
        ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            path,
            line,
            diagnostics,
        }
    }
}

/// Machine-readable form printed with `--error-json`.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<placeability::pipeline::StageDiagnostics>,
}
