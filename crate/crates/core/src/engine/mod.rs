//! Path simulation and wealth accounting.

mod path;
pub mod rng;
mod trace;
mod wealth;

use std::sync::Arc;

use crate::error::EngineError;
use crate::market::{PricingRule, SignalDynamics, SignalModel, Z0Law};
use crate::strategies::StrategyConfig;

pub use path::{simulate_path, JumpEvent, PathRecord, Terminal, MAX_HALVINGS};
pub use trace::write_trace;
pub use wealth::{check_jump_bounds, wealth_decomposition, wealth_direct, wealth_ibp, JumpBound, WealthBreakdown};

/// Everything needed to simulate one path given its index.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub rule: Arc<PricingRule>,
    pub signal: SignalModel,
    pub strategy: StrategyConfig,
    /// Grid step; `1/dt` must be an integer.
    pub dt: f64,
    pub seed: u64,
    /// Draw the insider's signal from `signal.z0_law` on every path.
    pub draw_z0: bool,
    /// Resolution at which noise increments are drawn and summed. Runs that
    /// share a seed and `noise_dt` see the same Brownian path at every `dt`.
    pub noise_dt: Option<f64>,
}

fn grid_count(step: f64, span: f64) -> Option<usize> {
    let n = (span / step).round();
    if n >= 1.0 && (n * step - span).abs() <= 1e-9 * span {
        Some(n as usize)
    } else {
        None
    }
}

impl SimConfig {
    pub fn new(rule: PricingRule, signal: SignalModel, strategy: StrategyConfig, dt: f64, seed: u64) -> Self {
        Self { rule: Arc::new(rule), signal, strategy, dt, seed, draw_z0: false, noise_dt: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_strategy(mut self, strategy: StrategyConfig) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_draw_z0(mut self, draw: bool) -> Self {
        self.draw_z0 = draw;
        self
    }

    pub fn with_noise_dt(mut self, noise_dt: f64) -> Self {
        self.noise_dt = Some(noise_dt);
        self
    }

    pub fn n_steps(&self) -> usize {
        (1.0 / self.dt).round() as usize
    }

    /// Noise sub-draws per grid step.
    pub(crate) fn noise_substeps(&self) -> usize {
        self.noise_dt.and_then(|nd| grid_count(nd, self.dt)).unwrap_or(1)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt <= 0.5) || grid_count(self.dt, 1.0).is_none() {
            return bad(format!("1/dt must be an integer >= 2, got dt = {}", self.dt));
        }
        if let Some(nd) = self.noise_dt {
            if !(nd > 0.0) || grid_count(nd, self.dt).is_none() {
                return bad(format!("noise_dt = {nd} must divide dt = {}", self.dt));
            }
        }
        if !self.signal.z.is_finite() {
            return bad("signal z must be finite".into());
        }
        if !self.signal.payoff.is_increasing() {
            return bad("payoff map must be increasing".into());
        }
        if let SignalDynamics::Brownian { vol } = self.signal.dynamics {
            if !(vol >= 0.0 && vol.is_finite()) {
                return bad("signal volatility must be finite and non-negative".into());
            }
        }
        if let Z0Law::Normal { mean, sd } = self.signal.z0_law {
            if !(mean.is_finite() && sd >= 0.0 && sd.is_finite()) {
                return bad("z0 law needs finite mean and non-negative sd".into());
            }
        }
        self.strategy.validate(&self.rule, self.dt)?;
        Ok(())
    }
}
