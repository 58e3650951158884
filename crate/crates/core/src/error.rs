use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::geometry::PlacementError;
use crate::mc::McError;
use crate::scenario::ConfigError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<McError> for Error {
    fn from(e: McError) -> Self {
        match e {
            McError::Placement(p) => Error::Placement(p),
            McError::NoTrials => Error::Usage(e.to_string()),
            McError::Pool(m) => Error::Io(std::io::Error::other(m)),
        }
    }
}

impl Error {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(ConfigError::Io(_)) | Error::Io(_) | Error::Csv(_) => 1,
            Error::Usage(_) => 2,
            Error::Config(_) => 3,
            Error::Analytic(_) => 4,
            Error::Placement(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
