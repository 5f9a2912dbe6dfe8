use thiserror::Error;

/// Errors produced by the solver kit.
#[derive(Debug, Error)]
pub enum Error {
    /// A disperse state or parameter lies outside its admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A rate or velocity evaluated to a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Invalid or inconsistent configuration. `path` names the offending key.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// The radius update had a nonpositive radicand.
    #[error("characteristic step {step} failed: radicand {radicand:e} is not positive")]
    Step { step: usize, radicand: f64 },

    /// Backward evaluation left the admissible state space.
    #[error("pre-image outside the admissible state space")]
    PreImageOutside,

    #[error("concentration became non-finite at step {step}")]
    Divergence { step: usize },

    #[error("concentration of component {component} became negative ({value:e}) at step {step}")]
    NegativeConcentration {
        step: usize,
        component: usize,
        value: f64,
    },

    #[error("time step {dt:e} violates the CFL bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("support box is empty")]
    EmptySupport,

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ODE step size underflow at t = {t:e}")]
    StepSizeUnderflow { t: f64 },

    #[error("empty snapshot")]
    EmptySnapshot,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// `true` for errors caused by invalid input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Domain(_) | Error::EmptySupport
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
