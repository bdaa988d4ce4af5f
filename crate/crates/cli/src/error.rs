use std::path::PathBuf;

/// Failure of a run, mapped onto the process exit status by [`RunError::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{}", config_message(.path, *.line, .message))]
    Config { path: Option<PathBuf>, line: Option<usize>, message: String },

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("oracle check failed: {0}")]
    OracleFailure(String),

    #[error(transparent)]
    Core(#[from] fgsim_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("table error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Other(String),
}

fn config_message(path: &Option<PathBuf>, line: Option<usize>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("invalid config: {}:{l}: {message}", p.display()),
        (Some(p), None) => format!("invalid config: {}: {message}", p.display()),
        (None, Some(l)) => format!("invalid config: line {l}: {message}"),
        (None, None) => format!("invalid config: {message}"),
    }
}

impl RunError {
    pub fn config(message: impl Into<String>) -> Self {
        RunError::Config { path: None, line: None, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// 2 for configuration errors, 3 for numerical instability, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use fgsim_core::Error as E;
        match self {
            RunError::Config { .. } => 2,
            RunError::Core(E::Validation(_) | E::Dimension(_) | E::Capacity { .. }) => 2,
            RunError::Instability(_) => 3,
            RunError::Core(E::Instability { .. } | E::StepSize { .. } | E::Physicality(_) | E::Singular { .. }) => 3,
            _ => 1,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;
