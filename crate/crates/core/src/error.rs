use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("centering table has {have} entries but the grid has {need} points")]
    MissingCentering { have: usize, need: usize },

    #[error("covariance not factorizable: leading minor {minor} non-positive at jitter {jitter:e}")]
    Factorization { minor: usize, jitter: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("unsupported law: {0}")]
    UnsupportedLaw(String),

    #[error("missing quantile table for {0}")]
    MissingTable(String),

    #[error("malformed csv at line {line}: {msg}")]
    Csv { line: u64, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
