use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("path error: {0}")]
    Path(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub(crate) fn path(msg: impl Into<String>) -> Self {
        Error::Path(msg.into())
    }

    /// True for errors raised by a numerical contract (solver, fit).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::Fit(_))
    }
}
