use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tridiagonal eigensolver did not converge for block A={atoms}, N={excitations}")]
    NoConvergence { atoms: usize, excitations: usize },

    #[error("outside the validity regime: {0}")]
    Regime(String),

    #[error("state support too large for quadrature: n_max={n_max} exceeds {limit}")]
    SupportTooLarge { n_max: usize, limit: usize },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
