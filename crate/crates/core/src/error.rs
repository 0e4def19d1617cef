use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precision exhausted (partial estimate {re:.6e}{im:+.6e}i, error {err:.3e}): {reason}")]
    PrecisionExhausted {
        re: f64,
        im: f64,
        err: f64,
        reason: String,
    },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("degenerate profile: {0}")]
    Degenerate(String),

    #[error("config error at {field}: {msg}")]
    Config { field: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Domain(msg.into()))
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
