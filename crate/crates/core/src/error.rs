//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter or configuration; maps to CLI exit code 2.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Numeric failure at run time; maps to CLI exit code 3.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// Supremum requested over a domain that intersects no grid node.
    #[error("empty evaluation set")]
    EmptyEvaluationSet,
    /// An estimate inside a claimed domain is undefined; signals a
    /// domain/bandwidth inconsistency rather than a legitimate empty region.
    #[error("undefined estimate inside domain at x = {0}")]
    UndefinedNodeInDomain(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
