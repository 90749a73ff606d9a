use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Text input rejected by one of the line-oriented parsers (1-based line).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid design: {0}")]
    Validation(String),

    #[error("instance `{instance}` does not fit in any rectangle of region `{region}`")]
    InfeasibleRegion { instance: String, region: String },

    #[error("no perfect matching: left item {left} cannot be matched")]
    Unmatchable { left: usize },

    #[error("legalization infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
