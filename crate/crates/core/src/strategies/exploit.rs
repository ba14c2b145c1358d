//! Strategies that pump a mis-specified penalty: Brownian loading against a
//! non-zero `c`, repeated jumps against a non-zero `j`.

use std::sync::Arc;

use crate::error::StrategyError;
use crate::market::PricingRule;
use crate::mathcore::{g_primitive, kw};
use crate::strategies::tracker::{guarded_repulsion, repulsion};
use crate::strategies::{Knots, Observation, Strategy, StrategyDecision, TargetSpace, Tracker};

/// Largest `w` on `[0,1] x [lo, hi]`, sampled on a 21 x 41 grid.
pub fn window_weight_max(rule: &PricingRule, lo: f64, hi: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        for k in 0..=40 {
            best = best.max(rule.w.eval(t, lo + (hi - lo) * k as f64 / 40.0));
        }
    }
    best
}

fn snap(t: f64, dt: f64) -> f64 {
    (t / dt).round() * dt
}

#[derive(Debug, Clone)]
enum Stage {
    Approach,
    Pump,
    Hold(Tracker),
}

/// Three-stage strategy: track a ramp into `(x1, x2)` by `t1`, keep
/// `R = K_w(t, X)` inside `(y1, y2)` on `[t1, t2]` while loading `b` on the
/// noise, then hold `X` at its `t2` value.
///
/// During the pump stage `R` follows
/// `dR = (b+1) dB + (b+1)^2 rep(R) dt + (b^2+2b) c dt`, where `rep` pushes
/// away from the near edge (with the landing guard of
/// [`guarded_repulsion`]) and the `c` term comes from the price
/// compensator. The position drift is therefore `(b+1)^2 rep(R) + G`.
#[derive(Debug, Clone)]
pub struct ExploitC {
    rule: Arc<PricingRule>,
    t1: f64,
    t2: f64,
    y1: f64,
    y2: f64,
    split: f64,
    b: f64,
    delta: f64,
    approach: Tracker,
    stage: Stage,
}

impl ExploitC {
    /// `t1`, `t2` are snapped to the grid of step `dt`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rule: Arc<PricingRule>,
        (t1, t2): (f64, f64),
        (x1, x2): (f64, f64),
        b: f64,
        delta: f64,
        dt: f64,
    ) -> Result<Self, StrategyError> {
        let (t1, t2) = (snap(t1, dt), snap(t2, dt));
        if !(0.0 < t1 && t1 < t2 && t2 < 1.0) {
            return Err(StrategyError::InvalidConfig(format!(
                "stage times must satisfy 0 < t1 < t2 < 1 on the grid, got {t1}, {t2}"
            )));
        }
        let y1 = kw(&rule, t1, x1)?;
        let y2 = kw(&rule, t1, x2)?;
        let mid = 0.5 * (x1 + x2);
        let approach = Tracker::new(Arc::clone(&rule), Knots::ramp(0.0, 0.0, t1, mid), TargetSpace::Signal, delta);
        Ok(Self { rule, t1, t2, y1, y2, split: 0.5 * (y1 + y2), b, delta, approach, stage: Stage::Approach })
    }

    pub fn band(&self) -> (f64, f64) {
        (self.y1, self.y2)
    }

    pub fn stage_times(&self) -> (f64, f64) {
        (self.t1, self.t2)
    }

    /// `1/(r - y1)` for `r <= split`, `-1/(y2 - r)` above.
    pub fn pump_repulsion(&self, r: f64) -> f64 {
        repulsion(r - self.split, self.half_width())
    }

    fn half_width(&self) -> f64 {
        0.5 * (self.y2 - self.y1)
    }
}

impl Strategy for ExploitC {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        let t = obs.t;
        if t < self.t1 - 1e-9 {
            self.stage = Stage::Approach;
            return self.approach.decide(obs);
        }
        if t < self.t2 - 1e-9 {
            self.stage = Stage::Pump;
            let r = kw(&self.rule, t, obs.x)?;
            let q = (self.b + 1.0) * (self.b + 1.0);
            let push = guarded_repulsion(r - self.split, self.half_width(), q, self.b + 1.0, obs.dt);
            let drift = push + g_primitive(&self.rule, t, obs.x)?;
            return Ok(StrategyDecision::continuous(drift, self.b));
        }
        if !matches!(self.stage, Stage::Hold(_)) {
            let hold = Tracker::new(Arc::clone(&self.rule), Knots::constant(obs.x), TargetSpace::Signal, self.delta);
            self.stage = Stage::Hold(hold);
        }
        match &self.stage {
            Stage::Hold(tr) => tr.decide(obs),
            _ => unreachable!(),
        }
    }

    fn check(&self, obs: &Observation) -> Result<(), StrategyError> {
        match &self.stage {
            Stage::Approach => self.approach.check(obs),
            Stage::Pump => {
                let r = kw(&self.rule, obs.t, obs.x)?;
                if r > self.y1 && r < self.y2 {
                    Ok(())
                } else {
                    Err(StrategyError::BoundaryBreach { t: obs.t, u: r - self.split, delta: self.half_width() })
                }
            }
            Stage::Hold(tr) => tr.check(obs),
        }
    }
}

/// Jumps of size `kappa` at `s_i = t1 + i (t2 - t1)/n`, `i = 0..n-1`. Before
/// `t1` and between jumps the signal tracks a ramp to the window midpoint;
/// after `t2` it is held there.
#[derive(Debug, Clone)]
pub struct ExploitJ {
    rule: Arc<PricingRule>,
    jump_times: Vec<f64>,
    t2: f64,
    kappa: f64,
    mid: f64,
    delta: f64,
    next: usize,
    ramp_pending: bool,
    tracker: Tracker,
}

impl ExploitJ {
    pub fn new(
        rule: Arc<PricingRule>,
        (t1, t2): (f64, f64),
        (x1, x2): (f64, f64),
        n_jumps: u32,
        kappa: f64,
        delta: f64,
        dt: f64,
    ) -> Result<Self, StrategyError> {
        let invalid = |m: String| Err(StrategyError::InvalidConfig(m));
        if n_jumps == 0 {
            return invalid("n_jumps must be at least 1".into());
        }
        if kappa == 0.0 || !kappa.is_finite() {
            return invalid("jump size must be finite and non-zero".into());
        }
        let (t1, t2) = (snap(t1, dt), snap(t2, dt));
        if !(0.0 < t1 && t1 < t2 && t2 < 1.0) {
            return invalid(format!("stage times must satisfy 0 < t1 < t2 < 1 on the grid, got {t1}, {t2}"));
        }
        let n = n_jumps as usize;
        let jump_times: Vec<f64> = (0..n).map(|i| snap(t1 + i as f64 * (t2 - t1) / n as f64, dt)).collect();
        if jump_times.windows(2).any(|w| w[1] <= w[0]) || jump_times[n - 1] >= t2 {
            return invalid(format!("{n} jumps do not fit on distinct grid nodes in [{t1}, {t2})"));
        }
        let mid = 0.5 * (x1 + x2);
        let tracker = Tracker::new(Arc::clone(&rule), Knots::ramp(0.0, 0.0, t1, mid), TargetSpace::Signal, delta);
        Ok(Self { rule, jump_times, t2, kappa, mid, delta, next: 0, ramp_pending: false, tracker })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }
}

impl Strategy for ExploitJ {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        if let Some(&s) = self.jump_times.get(self.next) {
            if !self.ramp_pending && obs.t >= s - 1e-9 {
                self.next += 1;
                self.ramp_pending = true;
                return Ok(StrategyDecision { jump: Some(self.kappa), ..Default::default() });
            }
        }
        if self.ramp_pending {
            let end = self.jump_times.get(self.next).copied().unwrap_or(self.t2);
            let ramp = Knots::ramp(obs.t, obs.x, end, self.mid);
            self.tracker = Tracker::new(Arc::clone(&self.rule), ramp, TargetSpace::Signal, self.delta);
            self.ramp_pending = false;
        }
        self.tracker.decide(obs)
    }

    fn check(&self, obs: &Observation) -> Result<(), StrategyError> {
        self.tracker.check(obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::catalog::back_identity;

    fn obs(t: f64, x: f64) -> Observation {
        Observation { t, dt: 1e-3, x, y: 0.0, b: 0.0, m: 0.0, z: 0.0 }
    }

    fn exploit_c(b: f64) -> ExploitC {
        ExploitC::new(Arc::new(back_identity()), (0.25, 0.75), (0.0, 1.0), b, 0.25, 1e-3).unwrap()
    }

    #[test]
    fn pump_stage_loading_and_repulsion() {
        let mut s = exploit_c(2.0);
        assert_eq!(s.band(), (0.0, 1.0));
        let d = s.decide(&obs(0.5, 0.5)).unwrap();
        assert_eq!(d.brown_load, 2.0);
        // At the split point the lower branch applies: 9 / (0.5 - 0).
        assert!((d.drift - 18.0).abs() < 1e-12);
        let d = s.decide(&obs(0.5, 0.6)).unwrap();
        assert!((d.drift + 9.0 / 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_loading_is_pure_repulsion() {
        let mut s = exploit_c(0.0);
        let d = s.decide(&obs(0.5, 0.2)).unwrap();
        assert_eq!(d.brown_load, 0.0);
        assert!((d.drift - 5.0).abs() < 1e-12);
        assert_eq!(d.qv_rate(), 1.0);
    }

    #[test]
    fn pump_breach_outside_band() {
        let mut s = exploit_c(1.0);
        s.decide(&obs(0.5, 0.5)).unwrap();
        assert!(s.check(&obs(0.501, 0.99)).is_ok());
        assert!(matches!(s.check(&obs(0.501, 1.0)), Err(StrategyError::BoundaryBreach { .. })));
    }

    #[test]
    fn hold_stage_freezes_signal() {
        let mut s = exploit_c(1.0);
        let d = s.decide(&obs(0.75, 0.3)).unwrap();
        assert_eq!(d.brown_load, 0.0);
        assert!((d.drift - 4.0).abs() < 1e-12);
        // The hold level is fixed at stage entry.
        let d = s.decide(&obs(0.8, 0.4)).unwrap();
        assert!((d.drift + 1.0 / 0.15).abs() < 1e-9);
    }

    #[test]
    fn jump_grid() {
        let s = ExploitJ::new(Arc::new(back_identity()), (0.2, 0.6), (0.0, 1.0), 4, 1.0, 0.25, 1e-3).unwrap();
        let want = [0.2, 0.3, 0.4, 0.5];
        for (a, b) in s.jump_times().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ExploitJ::new(Arc::new(back_identity()), (0.2, 0.201), (0.0, 1.0), 4, 1.0, 0.25, 1e-3).is_err());
    }

    #[test]
    fn jumps_once_per_node_then_ramps_back() {
        let mut s = ExploitJ::new(Arc::new(back_identity()), (0.2, 0.6), (0.0, 1.0), 4, 1.0, 0.25, 1e-3).unwrap();
        assert_eq!(s.decide(&obs(0.1, 0.25)).unwrap().jump, None);
        assert_eq!(s.decide(&obs(0.2, 0.5)).unwrap().jump, Some(1.0));
        let after = s.decide(&obs(0.2, 2.0)).unwrap();
        assert_eq!(after.jump, None);
        // Ramp from 2.0 at 0.2 to 0.5 at 0.3: slope -15, plus repulsion 4.
        assert!((after.drift - (-15.0 + 4.0)).abs() < 1e-6, "{}", after.drift);
        assert_eq!(s.decide(&obs(0.25, 1.25)).unwrap().jump, None);
    }
}
