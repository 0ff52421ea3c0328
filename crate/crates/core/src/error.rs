use std::path::PathBuf;

/// Errors produced anywhere in the simulator, readout or benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter or argument violates its documented contract.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical routine could not produce a meaningful result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A metric is undefined for the given data (for example NMSE on an
    /// all-zero target).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A data file does not follow its documented format.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// An experiment configuration could not be parsed or is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Attaches the path to I/O failures inside a CSV error.
    pub(crate) fn csv_at(path: &std::path::Path, e: csv::Error) -> Self {
        if !e.is_io_error() {
            return Error::Csv(e);
        }
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("checked is_io_error"),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
