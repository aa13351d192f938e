use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inconsistent dimensions or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration capacity exceeded: N = {n} is above the cap of {cap} sites")]
    Capacity { n: usize, cap: usize },

    #[error("disorder error: {0}")]
    Disorder(String),

    /// A mathematical precondition of an experiment does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{} of {total} realizations failed (indices {failed:?}); first failure: {first}", failed.len())]
    PartialFailure {
        failed: Vec<usize>,
        total: usize,
        first: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code associated with this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 2,
            Error::Io { .. } | Error::Csv(_) | Error::Schema(_) => 3,
            Error::Capacity { .. } => 4,
            Error::Precondition(_) | Error::Domain(_) | Error::Disorder(_) => 5,
            Error::PartialFailure { first, .. } => first.exit_code(),
        }
    }
}
