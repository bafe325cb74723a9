use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{0}")]
    Capacity(faultcurve::Error),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Core(faultcurve::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Csv { source, .. } if source.is_io_error() => 3,
            CliError::Capacity(_) => 4,
            CliError::Csv { .. } | CliError::Data(_) | CliError::Core(_) => 1,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
        move |source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<faultcurve::Error> for CliError {
    fn from(e: faultcurve::Error) -> Self {
        match e {
            faultcurve::Error::Capacity { .. } => CliError::Capacity(e),
            faultcurve::Error::InvalidArgument(_)
            | faultcurve::Error::InvalidDistribution(_)
            | faultcurve::Error::UnknownModel(_) => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
