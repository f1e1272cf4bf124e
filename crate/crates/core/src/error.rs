use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measure is not normalized: total mass {0}")]
    NotNormalized(f64),

    #[error("coincident particles at index {0} and {1}: gradient undefined")]
    Coincidence(usize, usize),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("grid window [{left}, {right}] too small: mass {edge_mass:e} near the boundary")]
    WindowTooSmall { left: f64, right: f64, edge_mass: f64 },

    #[error("self-consistent iteration is not contracting (L1 steps {history:?}); increase alpha_Q or lower the damping")]
    NonContraction { history: Vec<f64> },

    #[error("step size collapsed during burn-in: every proposal was rejected")]
    StepSizeCollapse,

    #[error("point {0} is outside the bulk of the limiting measure")]
    OutsideBulk(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing artifact {0}")]
    MissingArtifact(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
