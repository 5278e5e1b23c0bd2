use thiserror::Error;

#[derive(Debug, Error)]
pub enum FamaError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("port set is empty")]
    EmptyPorts,
    #[error("malformed dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FamaError>;
