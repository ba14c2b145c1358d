use thiserror::Error;

/// Failures of the deterministic numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("weighting function is not positive: w({t}, {x}) = {w}")]
    NonPositiveW { t: f64, x: f64, w: f64 },
    #[error("quadrature on [{a}, {b}] did not reach tolerance at maximum refinement")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("K_w({t}, .) does not reach {y}: bracket expansion exceeded |x| = 1e12")]
    NotOnto { t: f64, y: f64 },
    #[error("{a} is outside the range of H({t}, .)")]
    NotInRange { t: f64, a: f64 },
    #[error("H({t}, .) cannot be inverted at {s}")]
    NotInvertible { t: f64, s: f64 },
    #[error("non-finite value from {what} at t = {t}, x = {x}")]
    NonFinite { what: &'static str, t: f64, x: f64 },
    #[error("jump of zero size requested at t = {t}")]
    ZeroJump { t: f64 },
}

/// Failures raised by insider strategies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("tracking band breached at t = {t}: |U| = {u} >= {delta}")]
    BoundaryBreach { t: f64, u: f64, delta: f64 },
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Math(#[from] MathError),
}

/// Failures of path simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),
    #[error("path diverged (non-finite state) at t = {t}")]
    PathDiverged { t: f64 },
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Math(#[from] MathError),
}

impl EngineError {
    /// Errors that exclude a single path instead of aborting a run.
    pub fn is_path_local(&self) -> bool {
        matches!(
            self,
            EngineError::PathDiverged { .. }
                | EngineError::Strategy(StrategyError::BoundaryBreach { .. })
                | EngineError::Strategy(StrategyError::Math(_))
                | EngineError::Math(_)
        )
    }
}

/// Failures of the Monte Carlo harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("{excluded} of {n_paths} paths excluded, above the 0.1% limit")]
    TooManyDiverged { excluded: usize, n_paths: usize },
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("invalid experiment input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Math(#[from] MathError),
}

/// Failures of a batch run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BatchError {
    #[error("config schema error: {0}")]
    Schema(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}
