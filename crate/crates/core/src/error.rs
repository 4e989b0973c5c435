use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value was non-finite, negative where it must not be, or otherwise malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The generic-case solver was called on a degenerate parameter set.
    #[error("parameters are not in the generic case (A > 0, all p_i > 0); use classify_case instead: {0}")]
    NotGeneric(String),

    /// A closed form or estimate was requested for parameters it does not cover.
    #[error("unsupported parameter case: {0}")]
    UnsupportedCase(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A hypothesis guard such as `P(0) + Q(0) != 0` failed.
    #[error("guard violation: {0}")]
    GuardViolation(String),

    /// Two independent evaluation routes disagree beyond tolerance.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// No history in the catalog meets the endpoint and fitting constraints.
    #[error("no catalog history satisfies the constraints: {0}")]
    InfeasibleHistory(String),

    /// An iteration failed to converge.
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    /// The delayed integrator was asked to run with tau = 0.
    #[error("tau = 0: use integrate_ode for the non-delayed system")]
    ZeroDelay,

    /// A bracketing root search found no sign change.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
