use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates a hard model or contract invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A jump transform was requested outside its region of convergence.
    #[error("{0}")]
    Domain(String),

    /// `C(tau)` left the strip where the jump transform is finite.
    #[error("C(tau) left the jump-transform strip at tau = {tau}: {reason}")]
    Admissibility { tau: f64, reason: String },

    #[error("ODE solver failed at tau = {tau}: {reason}")]
    Solver { tau: f64, reason: String },

    #[error("{0}")]
    Quadrature(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Stable error name printed by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "ValidationError",
            Error::Domain(_) => "DomainError",
            Error::Admissibility { .. } => "AdmissibilityError",
            Error::Solver { .. } => "SolverError",
            Error::Quadrature(_) => "QuadratureError",
            Error::Config(_) => "ConfigError",
        }
    }

    /// True for errors caused by the caller's inputs rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Config(_))
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
