use thiserror::Error;

/// Coarse classification used by callers (notably the CLI) to pick an exit
/// status without matching on every variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input (bad distribution, unknown symbol, ...).
    Input,
    /// A size/enumeration cap would be exceeded.
    Resource,
    /// No embedding (or no feasible code) exists for the request.
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("distribution invalid: {0}")]
    InvalidDistribution(String),

    #[error("divergence is infinite: {0}")]
    InfiniteDivergence(String),

    #[error("scheme unsupported for this source: {0}")]
    UnsupportedScheme(String),

    #[error("size cap exceeded: {0}")]
    ResourceCap(String),

    #[error("exact enumeration cap exceeded: {0}; use Monte Carlo evaluation instead")]
    EnumerationCap(String),

    #[error("no feasible embedding: {0}")]
    Infeasible(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidDistribution(_)
            | Error::InfiniteDivergence(_)
            | Error::UnsupportedScheme(_) => ErrorKind::Input,
            Error::ResourceCap(_) | Error::EnumerationCap(_) => ErrorKind::Resource,
            Error::Infeasible(_) => ErrorKind::Infeasible,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
