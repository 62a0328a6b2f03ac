use thiserror::Error;

/// Errors raised by geometry, set and solver operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points or sets belong to different spaces")]
    SpaceMismatch,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("geodesic between antipodal points is not unique")]
    NonUniqueGeodesic,
    #[error("geodesic cannot be extended: {0}")]
    ExtensionUnavailable(String),
    #[error("infeasible triangle: {0}")]
    Infeasible(String),
    #[error("empty set")]
    EmptySet,
    #[error("hull iteration would produce {would} points, cap is {cap}")]
    HullTooLarge { would: usize, cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("space lacks required capability: {0}")]
    Capability(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("sampling starved: accepted {accepted} of {requested} (acceptance rate {rate:.2e})")]
    SamplingStarvation {
        accepted: usize,
        requested: usize,
        rate: f64,
    },
    #[error("no sigma satisfies the bound; smallest achievable F + 2 sigma is {best}")]
    NoFeasibleSigma { best: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by violated input assumptions rather than by
    /// numerical or capability limits.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::Capability(_)
                | Error::Infeasible(_)
                | Error::DomainViolation(_)
                | Error::SpaceMismatch
                | Error::InvalidPoint(_)
                | Error::EmptySet
                | Error::NoFeasibleSigma { .. }
                | Error::ExtensionUnavailable(_)
                | Error::NonUniqueGeodesic
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
