use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown macro {0:?}")]
    UnknownMacro(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("world {0} out of range")]
    InvalidWorld(usize),
    #[error("exhaustive budget exceeded: {needed} valuation bits > {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("frame is not rooted")]
    NotRooted,
    #[error("not a grid of bi-clusters: {0}")]
    NotAGrid(String),
    #[error("infinite count in {0}; cannot materialize")]
    Infinite(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("game script: {0}")]
    Script(String),
    #[error("io: {0}")]
    Io(String),
    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
