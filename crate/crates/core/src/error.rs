use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("formula is not consistent with the variable sequence: {0}")]
    Inconsistent(String),
    #[error("marker `{0}` occurs in the formula")]
    MarkerPresent(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("marker `{0}` collides with a structure proposition")]
    MarkerCollision(String),
    #[error("invalid separation: {0}")]
    InvalidSeparation(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("profile references unknown formula: {0}")]
    UnknownProfileKey(String),
    #[error("missing ptype for interface pair {0}")]
    MissingPType(String),
    #[error("type is over the wrong closure: {0}")]
    WrongClosure(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax",
            Error::UnboundVariable(_) => "unbound-variable",
            Error::Inconsistent(_) => "inconsistent",
            Error::MarkerPresent(_) => "marker-present",
            Error::UnknownNode(_) => "unknown-node",
            Error::MarkerCollision(_) => "marker-collision",
            Error::InvalidSeparation(_) => "invalid-separation",
            Error::InvalidStrategy(_) => "invalid-strategy",
            Error::InvalidDecomposition(_) => "invalid-decomposition",
            Error::SizeGuard(_) => "size-guard",
            Error::UnknownProfileKey(_) => "unknown-profile-key",
            Error::MissingPType(_) => "missing-ptype",
            Error::WrongClosure(_) => "wrong-closure",
            Error::Input(_) => "input",
        }
    }
}
