//! Insider trading rules. Each strategy turns the insider's observables at
//! a grid node into a trading decision: an absolutely continuous drift, a
//! loading on the noise-trade Brownian motion and an optional jump.

mod bridge;
mod config;
mod exploit;
mod tracker;

use crate::error::StrategyError;

pub use bridge::BridgeStrategy;
pub use config::{ScriptJump, Segment, StrategyConfig, TargetSpec};
pub use exploit::{window_weight_max, ExploitC, ExploitJ};
pub use tracker::{guarded_repulsion, repulsion, LANDING_MARGIN, Knots, TargetSpace, Tracker, TrackerStrategy};

/// What the insider sees at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t: f64,
    /// Length of the step about to be taken from `t`.
    pub dt: f64,
    pub x: f64,
    pub y: f64,
    /// Cumulative noise trades; `y - b` is the insider's position.
    pub b: f64,
    pub m: f64,
    /// Current value of the insider's signal.
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrategyDecision {
    /// `dt`-coefficient of the position.
    pub drift: f64,
    /// `dB`-coefficient of the position.
    pub brown_load: f64,
    /// Position jump executed at the node, before the continuous step.
    pub jump: Option<f64>,
}

impl StrategyDecision {
    pub fn continuous(drift: f64, brown_load: f64) -> Self {
        Self { drift, brown_load, jump: None }
    }

    /// `d[Y,Y]^c / dt` implied by the loading.
    pub fn qv_rate(&self) -> f64 {
        (1.0 + self.brown_load) * (1.0 + self.brown_load)
    }
}

/// Per-path trading rule. One instance is built per path and owned by the
/// path worker.
///
/// The engine calls [`Strategy::decide`] at each node. A decision carrying a
/// jump is executed immediately and `decide` is called again with the
/// post-jump observation; the second decision must not jump. After each
/// continuous step the engine calls [`Strategy::check`] and, on a breach,
/// retries the step on a halved sub-grid.
pub trait Strategy: Send {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError>;

    fn check(&self, _obs: &Observation) -> Result<(), StrategyError> {
        Ok(())
    }
}

/// `theta = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroStrategy;

impl Strategy for ZeroStrategy {
    fn decide(&mut self, _obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        Ok(StrategyDecision::default())
    }
}

/// Piecewise-constant drift and loading plus jumps at fixed grid times.
#[derive(Debug, Clone)]
pub struct ScriptedStrategy {
    segments: Vec<Segment>,
    /// `(time, size)` sorted by time.
    jumps: Vec<(f64, f64)>,
    next_jump: usize,
}

impl ScriptedStrategy {
    pub fn new(segments: Vec<Segment>, jumps: Vec<(f64, f64)>) -> Self {
        Self { segments, jumps, next_jump: 0 }
    }
}

impl Strategy for ScriptedStrategy {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        if let Some(&(at, size)) = self.jumps.get(self.next_jump) {
            if obs.t >= at - 1e-9 {
                self.next_jump += 1;
                return Ok(StrategyDecision { jump: Some(size), ..Default::default() });
            }
        }
        let seg = self.segments.iter().find(|s| obs.t < s.until - 1e-12);
        Ok(match seg {
            Some(s) => StrategyDecision::continuous(s.drift, s.load),
            None => StrategyDecision::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(t: f64) -> Observation {
        Observation { t, dt: 0.01, x: 0.0, y: 0.0, b: 0.0, m: 0.0, z: 0.0 }
    }

    #[test]
    fn zero_strategy_does_nothing() {
        let d = ZeroStrategy.decide(&obs(0.3)).unwrap();
        assert_eq!(d, StrategyDecision::default());
        assert_eq!(d.qv_rate(), 1.0);
    }

    #[test]
    fn scripted_segments_and_jumps() {
        let segs = vec![
            Segment { until: 0.5, drift: 1.0, load: 0.0 },
            Segment { until: 1.0, drift: 0.0, load: 2.0 },
        ];
        let mut s = ScriptedStrategy::new(segs, vec![(0.3, -0.5)]);
        assert_eq!(s.decide(&obs(0.1)).unwrap(), StrategyDecision::continuous(1.0, 0.0));
        assert_eq!(s.decide(&obs(0.3)).unwrap().jump, Some(-0.5));
        assert_eq!(s.decide(&obs(0.3)).unwrap().jump, None);
        let late = s.decide(&obs(0.7)).unwrap();
        assert_eq!(late.brown_load, 2.0);
        assert_eq!(late.qv_rate(), 9.0);
    }
}
