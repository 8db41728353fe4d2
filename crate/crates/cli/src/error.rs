use osc_core::error::OscError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_REGRESSION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Divergence(String),

    #[error("{0}")]
    Regression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Divergence(_) => EXIT_DIVERGENCE,
            CliError::Regression(_) => EXIT_REGRESSION,
            CliError::Io(_) | CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl From<OscError> for CliError {
    fn from(e: OscError) -> Self {
        match e {
            OscError::Divergence { .. } => CliError::Divergence(e.to_string()),
            OscError::Io(io) => CliError::Io(io),
            OscError::Config(_)
            | OscError::Calibration(_)
            | OscError::InvalidGrid(_)
            | OscError::InvalidParameter(_)
            | OscError::Json(_)
            | OscError::Format(_) => CliError::Config(e.to_string()),
            OscError::ShapeMismatch(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
