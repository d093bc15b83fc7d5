use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fields are sampled on different grids")]
    GridMismatch,

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("aliasing detected: {fraction:.3e} of the power lies on the grid edge")]
    Aliasing { fraction: f64 },

    #[error("quadrature angle {theta} rad has sin θ = 0; displacement is not measured")]
    UndefinedQuadrature { theta: f64 },

    #[error("expansion requires a Hermite-Gauss input field")]
    NotHermiteGauss,

    #[error("no pixel carries displacement information")]
    NoInformation,

    #[error("series too short: {len} samples, need at least {needed}")]
    TooShort { len: usize, needed: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
