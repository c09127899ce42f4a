use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size {0} is not supported (must be even and at least 4)")]
    InvalidGrid(usize),

    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },

    #[error("right-hand side is not in the range of the operator (mean {mean:e} must vanish)")]
    NotInRange { mean: f64 },

    #[error("inertia operator is not invertible: symbol vanishes at |k| = {k}")]
    NotInvertible { k: usize },

    #[error("inertia symbol has {len} entries but the grid needs {needed}")]
    SymbolTooShort { len: usize, needed: usize },

    #[error("invalid inertia operator: {0}")]
    InvalidInertia(String),

    #[error("inertia operator cannot be normalized: A1 = 0")]
    NotNormalizable,

    #[error("inertia operator is not normalized: A1 = {s0}, expected 1")]
    NotNormalized { s0: f64 },

    #[error("quantity is undefined for b = 0 (secular branch)")]
    SecularBranch,

    #[error("mode index must be nonzero")]
    ZeroMode,

    #[error("hypothetical operator cannot be inverted on mode {0}")]
    OffDiagonalInverse(i64),

    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("flow map ceased to be a diffeomorphism at t = {t} (min g_x = {min_gx:e})")]
    DiffeomorphismLost { t: f64, min_gx: f64 },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
