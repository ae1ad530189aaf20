use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;
use wavelab_core::ErrorClass;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{key}: {message}")]
    Validation { key: String, message: String },

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: wavelab_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a core error raised while handling `key`.
    pub fn core(key: impl Into<String>, err: wavelab_core::Error) -> Self {
        let key = key.into();
        match err.class() {
            ErrorClass::Numerical => CliError::Numerical {
                context: key,
                source: err,
            },
            ErrorClass::Validation => {
                let key = match &err {
                    wavelab_core::Error::InvalidParameter { name, .. } if !key.ends_with(name) => {
                        format!("{key}.{name}")
                    }
                    _ => key,
                };
                CliError::Validation {
                    key,
                    message: err.to_string(),
                }
            }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Numerical { .. } => 2,
            CliError::Io { .. } => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON record for the diagnostic stream.
    pub fn to_json_line(&self) -> String {
        let detail = match self {
            CliError::Validation { key, .. } => json!({ "key": key }),
            CliError::Numerical { context, .. } => json!({ "context": context }),
            CliError::Io { path, .. } => json!({ "path": path.display().to_string() }),
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
            "detail": detail,
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub(crate) trait CoreContext<T> {
    fn at(self, key: &str) -> CliResult<T>;
}

impl<T> CoreContext<T> for wavelab_core::Result<T> {
    fn at(self, key: &str) -> CliResult<T> {
        self.map_err(|e| CliError::core(key, e))
    }
}
