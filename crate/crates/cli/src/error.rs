use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{0}")]
    Input(genbound::Error),

    #[error("numeric guard failed: {0}")]
    Numeric(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// Library errors split by whether the input or a numeric guard is at fault.
impl From<genbound::Error> for CliError {
    fn from(e: genbound::Error) -> Self {
        use genbound::Error as E;
        match e {
            E::NormalizationDrift { .. }
            | E::QuadratureCalibration { .. }
            | E::InfeasibleLp(_)
            | E::NegativeDivergence(_)
            | E::JsOutOfRange(_)
            | E::DegenerateCorrelation(_)
            | E::NonPositiveDefinite(_) => CliError::Numeric(e.to_string()),
            other => CliError::Input(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
