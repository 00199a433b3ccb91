use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("scale {requested} exceeds the enumeration cap {cap}")]
    ScaleCap { requested: u64, cap: u64 },

    #[error("search cap exhausted: {0}")]
    SearchCap(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A transform would need a row sum that is not known to converge.
    #[error("domain risk: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("index overflow: {0}")]
    Overflow(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn syntax(position: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            position,
            message: message.into(),
        }
    }
}
