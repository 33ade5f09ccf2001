//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    #[error("invalid system spec: {0}")]
    InvalidSpec(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("steady state is degenerate (numerical kernel dimension {multiplicity})")]
    DegenerateSteadyState { multiplicity: usize },

    #[error("solver failed to converge: residual {residual:.3e} (target {target:.3e})")]
    SolverFailure { residual: f64, target: f64 },

    #[error(
        "propagator step size collapsed below {min_step:.3e} at t = {t:.3e}; \
         the generator is too stiff for the requested tolerance — consider a tighter \
         Fock truncation or scaled tolerances"
    )]
    Stiffness { t: f64, min_step: f64 },

    #[error("heralding impossible: jump channel has zero weight on this state")]
    HeraldImpossible,

    #[error("photon statistics undefined: cavity population below numerical floor")]
    UndefinedStatistics,

    #[error("state space too large for a direct kernel solve: {size} > {limit}")]
    StateSpaceTooLarge { size: usize, limit: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
