use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A curvature quotient was requested outside the cone where it is defined.
    #[error("cone violation: {0}")]
    ConeViolation(String),

    #[error("discretization failure at node {node}: {reason}")]
    Discretization { node: usize, reason: String },

    #[error("shape is not h-convex (min principal curvature {min_kappa:.6})")]
    NotHConvex { min_kappa: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("step rejected {halvings} times at t = {t}: {reason}")]
    StepFailure { t: f64, halvings: u32, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
