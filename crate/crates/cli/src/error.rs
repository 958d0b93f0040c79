use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

/// Failure of a subcommand with its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input data; exit code 2.
    Usage {
        message: String,
        path: Option<PathBuf>,
    },
    /// Anything that went wrong after the inputs were accepted; exit code 1.
    Internal {
        message: String,
        path: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage {
            message: message.into(),
            path: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Internal { .. } => 1,
        }
    }

    /// One-line machine-readable description.
    pub fn to_json(&self) -> String {
        let (kind, message, path) = match self {
            CliError::Usage { message, path } => ("usage", message, path),
            CliError::Internal { message, path } => ("internal", message, path),
        };
        serde_json::to_string(&ErrorJson {
            error: kind,
            message,
            path: path.as_ref().map(|p| p.display().to_string()),
        })
        .expect("error JSON")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage { message, .. } | CliError::Internal { message, .. } => {
                f.write_str(message)
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<dnmf_core::Error> for CliError {
    fn from(e: dnmf_core::Error) -> Self {
        use dnmf_core::Error as E;
        let message = e.to_string();
        match e {
            E::Io { path, source } => {
                let path = Some(path);
                if source.kind() == std::io::ErrorKind::NotFound {
                    CliError::Usage { message, path }
                } else {
                    CliError::Internal { message, path }
                }
            }
            E::Parse { path, .. } => CliError::Usage {
                message,
                path: Some(path),
            },
            E::InvalidArgument(_)
            | E::Shape { .. }
            | E::Negative { .. }
            | E::EmptyCorpus
            | E::EmptyVocabulary { .. }
            | E::CorpusTooSmall { .. }
            | E::MissingLabels => CliError::Usage {
                message,
                path: None,
            },
            E::Eigen(_) | E::EmptyCluster { .. } | E::MonotonicityViolated { .. } | E::Serde(_) => {
                CliError::Internal {
                    message,
                    path: None,
                }
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps an I/O failure on `path` as an internal error.
pub fn io_error(path: impl Into<PathBuf>, e: impl fmt::Display) -> CliError {
    let path = path.into();
    CliError::Internal {
        message: format!("{}: {e}", path.display()),
        path: Some(path),
    }
}
