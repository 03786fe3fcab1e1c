use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const VERIFICATION: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: qrenew_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing output: {0}")]
    Csv(#[from] csv::Error),

    #[error("writing output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{failed} of {total} verification checks failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_numeric() => exit::NUMERIC,
            CliError::Verification { .. } => exit::VERIFICATION,
            _ => exit::VALIDATION,
        }
    }
}

/// Attaches a description of the failing step to core errors.
pub trait Context<T> {
    fn context<S: Into<String>>(self, what: S) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, qrenew_core::Error> {
    fn context<S: Into<String>>(self, what: S) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: what.into(),
            source,
        })
    }
}
