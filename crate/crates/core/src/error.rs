use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock basis too small: n_max = {n_max}, need at least 2")]
    BasisTooSmall { n_max: usize },

    #[error("unsupported mode count {0}; only one or two modes are represented")]
    InvalidModeCount(usize),

    #[error("mode index {mode} out of range for a {n_modes}-mode basis")]
    ModeIndexOutOfRange { mode: usize, n_modes: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("array dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires a two-mode basis")]
    NotTwoMode,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unphysical model: {0}")]
    Unphysical(String),

    #[error("drift matrix is not Hurwitz: eigenvalue {re:.6e} + {im:.6e}i")]
    NonHurwitz { re: f64, im: f64 },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: &'static str, residual: f64 },

    #[error("integrator failed at t = {t:.6e} (achieved error norm {residual:.3e})")]
    IntegratorFailure { t: f64, residual: f64 },

    #[error("singular linear system in {0}")]
    Singular(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::IntegratorFailure { .. }
                | Error::Singular(_)
                | Error::NonHurwitz { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
