use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested; printed to stdout with status 0.
    #[error("{0}")]
    Info(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: aoi_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    /// Wraps a core error raised while running a job. Parameter and
    /// configuration errors trace back to user input and become usage
    /// errors.
    pub fn from_core(context: impl Into<String>, e: aoi_core::Error) -> Self {
        use aoi_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Parse { .. } | E::Config(_) => {
                CliError::Usage(format!("{}: {e}", context.into()))
            }
            _ => CliError::Numerical {
                context: context.into(),
                source: e,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
