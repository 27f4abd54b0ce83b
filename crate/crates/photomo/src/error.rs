use std::path::Path;

/// Front-end error; [`CliError::exit_code`] maps it to the process status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] photomo_core::Error),

    /// Inconsistent configuration or arguments.
    #[error("{0}")]
    Invalid(String),

    /// Malformed input file.
    #[error("{0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 2 for validation failures, 3 for convergence failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_convergence() => 3,
            CliError::Core(_) | CliError::Invalid(_) | CliError::Format(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}
