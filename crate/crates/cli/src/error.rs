use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dataset: {0}")]
    Parse(String),
    #[error("dataset has no rows")]
    EmptyDataset,
}

pub type Result<T> = std::result::Result<T, CliError>;
