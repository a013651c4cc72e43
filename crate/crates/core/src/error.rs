use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error at row {row}: {message}")]
    Data { row: usize, message: String },

    #[error("trajectory {0} is empty after cleaning")]
    EmptyTrajectory(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("collision at step {step} (gap {gap:.3} m)")]
    Collision { step: usize, gap: f64 },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("endpoint unavailable: {0}")]
    Unavailable(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("remote error [{code}]: {message}")]
    Remote { code: String, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Data { .. } => "data",
            Error::EmptyTrajectory(_) => "empty_trajectory",
            Error::Split(_) => "split",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Fit(_) => "fit",
            Error::Contract(_) => "contract",
            Error::Collision { .. } => "collision",
            Error::Evaluation(_) => "evaluation",
            Error::Unavailable(_) => "unavailable",
            Error::Protocol(_) => "protocol",
            Error::Remote { .. } => "remote",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
