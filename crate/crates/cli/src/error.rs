use fsi_robin::FsiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    ReadConfig {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("solver: {0}")]
    Solver(#[from] FsiError),
    #[error("threshold not met: {0}")]
    Threshold(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => 2,
            CliError::Io(_) | CliError::Csv(_) | CliError::Solver(_) => 3,
            CliError::Threshold(_) => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
