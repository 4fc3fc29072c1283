use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented range or structural rule.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An input file could not be read as the documented schema.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    /// The optimization model has no feasible point.
    #[error("model is infeasible: {0}")]
    Infeasible(String),

    /// An external solver or the enumeration backend failed.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A solution failed a consistency check against the model.
    #[error("inconsistent solution: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
}
