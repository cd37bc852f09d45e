use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate light curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid light curve: {0}")]
    InvalidCurve(String),

    #[error("invalid period {0} (must be positive and finite)")]
    InvalidPeriod(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every lag slot is empty")]
    InsufficientPairs,

    #[error("no candidate periods inside the search band")]
    NoCandidates,
}

pub type Result<T> = std::result::Result<T, Error>;
