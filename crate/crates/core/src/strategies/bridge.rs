use std::sync::Arc;

use crate::error::StrategyError;
use crate::market::PricingRule;
use crate::mathcore::kw;
use crate::strategies::{Knots, Observation, Strategy, StrategyDecision, TargetSpace, Tracker};

/// Band used by the tracker that takes over once demand leaves `(-n, n)`.
const EXIT_BAND: f64 = 1.0;

/// Drives total demand to `M` with drift `(M - Y)/(1 - t)`.
///
/// The first time `|Y| >= band` the strategy switches for good to a tracker
/// that walks `K_w(t, X)` linearly from its exit value to 0 at `t = 1`. On the
/// last step, which would otherwise see the singular drift, the position
/// loads `-1` on the noise and closes `Y` onto `M` exactly.
#[derive(Debug, Clone)]
pub struct BridgeStrategy {
    rule: Arc<PricingRule>,
    band: f64,
    exit: Option<Tracker>,
}

impl BridgeStrategy {
    pub fn new(rule: Arc<PricingRule>, band: f64) -> Self {
        Self { rule, band, exit: None }
    }

    /// Whether demand has left the band and tracking took over.
    pub fn exited(&self) -> bool {
        self.exit.is_some()
    }
}

/// Bridge drift `(m - y)/(1 - t)`.
pub fn bridge_drift(t: f64, m: f64, y: f64) -> f64 {
    (m - y) / (1.0 - t)
}

impl Strategy for BridgeStrategy {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        if self.exit.is_none() && obs.y.abs() >= self.band {
            let start = kw(&self.rule, obs.t, obs.x)?;
            let path = Knots::ramp(obs.t, start, 1.0, 0.0);
            self.exit = Some(Tracker::new(Arc::clone(&self.rule), path, TargetSpace::Transformed, EXIT_BAND));
        }
        if let Some(tr) = &self.exit {
            return tr.decide(obs);
        }
        if obs.t + obs.dt >= 1.0 - 1e-12 {
            return Ok(StrategyDecision::continuous((obs.m - obs.y) / obs.dt, -1.0));
        }
        Ok(StrategyDecision::continuous(bridge_drift(obs.t, obs.m, obs.y), 0.0))
    }

    fn check(&self, obs: &Observation) -> Result<(), StrategyError> {
        match &self.exit {
            Some(tr) => tr.check(obs),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::catalog::back_identity;

    fn obs(t: f64, m: f64, y: f64) -> Observation {
        Observation { t, dt: 0.01, x: y, y, b: 0.0, m, z: m }
    }

    #[test]
    fn drift_examples() {
        let mut s = BridgeStrategy::new(Arc::new(back_identity()), 10.0);
        let d = s.decide(&obs(0.5, 1.0, 0.0)).unwrap();
        assert!((d.drift - 2.0).abs() < 1e-15 && d.brown_load == 0.0);
        assert_eq!(s.decide(&obs(0.9, 1.0, 1.0)).unwrap().drift, 0.0);
    }

    #[test]
    fn last_step_closes_demand() {
        let mut s = BridgeStrategy::new(Arc::new(back_identity()), 10.0);
        let d = s.decide(&obs(0.99, 1.0, 0.8)).unwrap();
        assert_eq!(d.brown_load, -1.0);
        assert!((d.drift * 0.01 - 0.2).abs() < 1e-12);
        assert_eq!(d.qv_rate(), 0.0);
    }

    #[test]
    fn band_exit_switches_to_tracking() {
        let mut s = BridgeStrategy::new(Arc::new(back_identity()), 2.0);
        s.decide(&obs(0.4, 1.0, 2.5)).unwrap();
        assert!(s.exited());
        // Back in the band the strategy keeps tracking: target 2.5 (1-t)/0.6.
        let d = s.decide(&obs(0.7, 1.0, 1.25)).unwrap();
        assert!((d.drift - (1.0 - 2.5 / 0.6)).abs() < 1e-9, "{}", d.drift);
    }
}
