use std::sync::Arc;

use crate::error::{MathError, StrategyError};
use crate::market::PricingRule;
use crate::mathcore::{g_primitive, kw};
use crate::strategies::{Observation, Strategy, StrategyDecision};

/// Piecewise-linear path through `(t, value)` knots, constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Knots(Vec<(f64, f64)>);

impl Knots {
    /// Knots must be non-empty with strictly increasing times.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, StrategyError> {
        if knots.is_empty() {
            return Err(StrategyError::InvalidConfig("target path has no knots".into()));
        }
        if knots.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(StrategyError::InvalidConfig("target knot times must increase".into()));
        }
        if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(StrategyError::InvalidConfig("target knots must be finite".into()));
        }
        Ok(Self(knots))
    }

    pub fn constant(v: f64) -> Self {
        Self(vec![(0.0, v)])
    }

    /// Straight line from `(t0, v0)` to `(t1, v1)`.
    pub fn ramp(t0: f64, v0: f64, t1: f64, v1: f64) -> Self {
        if t1 <= t0 {
            Self(vec![(t0, v1)])
        } else {
            Self(vec![(t0, v0), (t1, v1)])
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = &self.0;
        if t <= k[0].0 {
            return k[0].1;
        }
        for p in k.windows(2) {
            let ((t0, v0), (t1, v1)) = (p[0], p[1]);
            if t <= t1 {
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        k[k.len() - 1].1
    }
}

/// Whether the knots describe the signal `X` or its transform `K_w(t, X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSpace {
    Signal,
    Transformed,
}

/// Two-sided repulsion `1/(u + delta)` for `u <= 0`, `-1/(delta - u)` for `u > 0`.
pub fn repulsion(u: f64, delta: f64) -> f64 {
    if u <= 0.0 {
        1.0 / (u + delta)
    } else {
        -1.0 / (delta - u)
    }
}

/// Noise standard deviations kept between the noiseless landing point of a
/// step and the band edge.
pub const LANDING_MARGIN: f64 = 3.0;

/// `gain * repulsion(u, delta)`, raised near an edge so that a step of length
/// `h` without noise lands at least `LANDING_MARGIN` noise standard deviations
/// (`vol * sqrt(h)`) inside the band, and lowered so that it never carries
/// the point closer than that to the opposite edge.
///
/// An explicit step from distance `d` with push `gain / d` crosses the edge
/// with probability about `Phi(-2)` at the worst `d`, at every step size. The
/// floor only acts within `O(sqrt(h))` of the edge, so the drift of the
/// continuous-time limit is unchanged.
pub fn guarded_repulsion(u: f64, delta: f64, gain: f64, vol: f64, h: f64) -> f64 {
    let push = gain * repulsion(u, delta);
    let floor = LANDING_MARGIN * vol * h.max(0.0).sqrt();
    if h <= 0.0 || floor >= delta {
        return push;
    }
    let (d, inward) = if u <= 0.0 { (u + delta, push) } else { (delta - u, -push) };
    let landing = d + inward * h;
    let inward = if landing < floor {
        (floor - d) / h
    } else if landing > 2.0 * delta - floor {
        ((2.0 * delta - floor - d) / h).max(0.0)
    } else {
        return push;
    };
    if u <= 0.0 {
        inward
    } else {
        -inward
    }
}

/// Keeps `U = K_w(t, X) - K_w(t, x(t))` inside `(-delta, delta)`.
///
/// Along a finite-variation position with drift `a`, `K_w(t, X)` moves by
/// `dB + (a - G(t, X)) dt`, so the drift `G + repulsion(U) + d/dt K_w(t, x(t))`
/// makes `U` a Brownian motion pushed away from both edges of the band.
#[derive(Debug, Clone)]
pub struct Tracker {
    rule: Arc<PricingRule>,
    target: Knots,
    space: TargetSpace,
    delta: f64,
}

impl Tracker {
    pub fn new(rule: Arc<PricingRule>, target: Knots, space: TargetSpace, delta: f64) -> Self {
        Self { rule, target, space, delta }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `K_w(t, x(t))`.
    pub fn transformed_target(&self, t: f64) -> Result<f64, MathError> {
        let v = self.target.at(t);
        match self.space {
            TargetSpace::Signal => kw(&self.rule, t, v),
            TargetSpace::Transformed => Ok(v),
        }
    }

    pub fn deviation(&self, t: f64, x: f64) -> Result<f64, MathError> {
        Ok(kw(&self.rule, t, x)? - self.transformed_target(t)?)
    }

    pub fn decide(&self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        let u = self.deviation(obs.t, obs.x)?;
        let t_next = (obs.t + obs.dt).min(1.0);
        let slope = if t_next > obs.t {
            (self.transformed_target(t_next)? - self.transformed_target(obs.t)?) / (t_next - obs.t)
        } else {
            0.0
        };
        let drift = g_primitive(&self.rule, obs.t, obs.x)? + guarded_repulsion(u, self.delta, 1.0, 1.0, obs.dt) + slope;
        Ok(StrategyDecision::continuous(drift, 0.0))
    }

    pub fn check(&self, obs: &Observation) -> Result<(), StrategyError> {
        let u = self.deviation(obs.t, obs.x)?;
        if u.abs() >= self.delta || !u.is_finite() {
            return Err(StrategyError::BoundaryBreach { t: obs.t, u, delta: self.delta });
        }
        Ok(())
    }
}

/// Stand-alone tracker strategy.
#[derive(Debug, Clone)]
pub struct TrackerStrategy(pub Tracker);

impl Strategy for TrackerStrategy {
    fn decide(&mut self, obs: &Observation) -> Result<StrategyDecision, StrategyError> {
        self.0.decide(obs)
    }

    fn check(&self, obs: &Observation) -> Result<(), StrategyError> {
        self.0.check(obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::catalog::{back_identity, g_positive};

    #[test]
    fn repulsion_examples() {
        assert_eq!(repulsion(0.0, 0.25), 4.0);
        assert!((repulsion(0.2, 0.25) + 20.0).abs() < 1e-12);
        assert!((repulsion(-0.2, 0.25) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn guard_only_acts_near_the_edge() {
        // Far from the edge the plain repulsion is returned.
        assert_eq!(guarded_repulsion(0.0, 0.25, 1.0, 1.0, 1e-4), 4.0);
        assert_eq!(guarded_repulsion(0.1, 0.25, 2.0, 1.0, 1e-4), 2.0 * repulsion(0.1, 0.25));
        // Distance 0.01 with noise sd 0.01: the landing point is lifted to 0.03.
        let h = 1e-4;
        let up = guarded_repulsion(-0.24, 0.25, 1.0, 1.0, h);
        assert!((0.01 + up * h - 0.03).abs() < 1e-12);
        let down = guarded_repulsion(0.24, 0.25, 1.0, 1.0, h);
        assert!((down + up).abs() < 1e-9);
        // Without room for the margin the guard stays off.
        assert!((guarded_repulsion(-0.24, 0.25, 1.0, 10.0, h) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn knots_interpolate_and_clamp() {
        let k = Knots::new(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        assert_eq!(k.at(-1.0), 0.0);
        assert_eq!(k.at(0.25), 0.5);
        assert_eq!(k.at(0.75), 0.5);
        assert_eq!(k.at(2.0), 0.0);
        assert!(Knots::new(vec![(0.5, 0.0), (0.5, 1.0)]).is_err());
        assert!(Knots::new(vec![]).is_err());
    }

    #[test]
    fn drift_includes_target_slope_and_g() {
        let ramp = Knots::ramp(0.0, 0.0, 1.0, 2.0);
        let tr = Tracker::new(Arc::new(back_identity()), ramp, TargetSpace::Signal, 0.5);
        let o = Observation { t: 0.5, dt: 0.01, x: 1.0, y: 0.0, b: 0.0, m: 0.0, z: 0.0 };
        let d = tr.decide(&o).unwrap();
        assert!((d.drift - (2.0 + 2.0)).abs() < 1e-9);
        assert_eq!(d.brown_load, 0.0);

        // g-positive: G(t, x) = x / (1+t)^2 and K(t, x) = x / (1+t).
        let hold = Tracker::new(Arc::new(g_positive()), Knots::constant(1.0), TargetSpace::Signal, 0.5);
        let o = Observation { t: 0.0, dt: 1e-6, x: 1.0, ..o };
        let d = hold.decide(&o).unwrap();
        assert!((d.drift - (1.0 + 2.0 - 1.0)).abs() < 1e-5, "{}", d.drift);
    }

    #[test]
    fn breach_is_reported() {
        let tr = Tracker::new(Arc::new(back_identity()), Knots::constant(0.0), TargetSpace::Signal, 0.1);
        let mut o = Observation { t: 0.5, dt: 0.01, x: 0.05, y: 0.0, b: 0.0, m: 0.0, z: 0.0 };
        assert!(tr.check(&o).is_ok());
        o.x = -0.1;
        assert!(matches!(tr.check(&o), Err(StrategyError::BoundaryBreach { .. })));
    }
}
