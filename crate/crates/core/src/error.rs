use thiserror::Error;

pub type Result<T> = std::result::Result<T, OscError>;

#[derive(Debug, Error)]
pub enum OscError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("iteration diverged at n = {iterate}: {detail}")]
    Divergence { iterate: usize, detail: String },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
