use thiserror::Error;

/// Errors raised by the walk laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error in {param}: {reason}")]
    Domain { param: &'static str, reason: String },

    /// An adaptive numerical procedure failed to reach its tolerance.
    #[error("no convergence in {what}: {diagnostics}")]
    NonConvergence { what: &'static str, diagnostics: String },
}

impl Error {
    pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain { param, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
