use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("{0}")]
    Core(#[from] ergolin_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DriverError>;

impl DriverError {
    pub fn config(msg: impl Into<String>) -> Self {
        DriverError::Config(msg.into())
    }

    /// Process exit code: 2 for configuration, 3 for precision, 4 for
    /// internal-consistency failures, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        use ergolin_core::Error as E;
        match self {
            DriverError::Config(_) => 2,
            DriverError::Core(E::Config(_) | E::Size { .. }) => 2,
            DriverError::Core(E::Precision(_) | E::Horizon { .. }) => 3,
            DriverError::Core(E::Consistency { .. }) => 4,
            DriverError::Io(_) | DriverError::Csv(_) | DriverError::Json(_) => 1,
        }
    }
}
