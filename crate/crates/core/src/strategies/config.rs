use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::StrategyError;
use crate::market::PricingRule;
use crate::mathcore::kw;
use crate::strategies::{
    window_weight_max, BridgeStrategy, ExploitC, ExploitJ, Knots, ScriptedStrategy, Strategy, TargetSpace, Tracker,
    TrackerStrategy, ZeroStrategy,
};

/// Tracker target: a constant level or `[t, x]` knots of a piecewise-linear path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Constant(f64),
    Knots(Vec<[f64; 2]>),
}

impl TargetSpec {
    fn knots(&self) -> Result<Knots, StrategyError> {
        match self {
            TargetSpec::Constant(v) => Ok(Knots::constant(*v)),
            TargetSpec::Knots(k) => Knots::new(k.iter().map(|p| (p[0], p[1])).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Segment applies on `[previous until, until)`.
    pub until: f64,
    pub drift: f64,
    pub load: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptJump {
    pub t: f64,
    pub size: f64,
}

fn default_band() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategyConfig {
    Zero,
    Bridge {
        #[serde(default = "default_band")]
        band: f64,
    },
    Tracker {
        target: TargetSpec,
        delta: f64,
    },
    ExploitC {
        t1: f64,
        t2: f64,
        x1: f64,
        x2: f64,
        b: f64,
        /// Signal-space band of the approach and hold stages; `(x2 - x1)/4` by default.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    ExploitJ {
        t1: f64,
        t2: f64,
        x1: f64,
        x2: f64,
        n_jumps: u32,
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Scripted {
        #[serde(default)]
        segments: Vec<Segment>,
        #[serde(default)]
        jumps: Vec<ScriptJump>,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, StrategyError> {
    Err(StrategyError::InvalidConfig(msg.into()))
}

fn check_finite(name: &str, v: f64) -> Result<(), StrategyError> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite"))
    }
}

impl StrategyConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StrategyConfig::Zero => "zero",
            StrategyConfig::Bridge { .. } => "bridge",
            StrategyConfig::Tracker { .. } => "tracker",
            StrategyConfig::ExploitC { .. } => "exploit_c",
            StrategyConfig::ExploitJ { .. } => "exploit_j",
            StrategyConfig::Scripted { .. } => "scripted",
        }
    }

    /// True for strategies without jumps or Brownian loading.
    pub fn is_finite_variation(&self) -> bool {
        match self {
            StrategyConfig::Zero | StrategyConfig::Bridge { .. } | StrategyConfig::Tracker { .. } => true,
            StrategyConfig::ExploitC { b, .. } => *b == 0.0,
            StrategyConfig::ExploitJ { .. } => false,
            StrategyConfig::Scripted { segments, jumps } => jumps.is_empty() && segments.iter().all(|s| s.load == 0.0),
        }
    }

    /// Band in transformed space for the exploit trackers, `epsilon / max w`.
    fn exploit_delta(rule: &PricingRule, x1: f64, x2: f64, epsilon: Option<f64>) -> Result<f64, StrategyError> {
        let eps = epsilon.unwrap_or(0.25 * (x2 - x1));
        if !(eps > 0.0 && eps < 0.5 * (x2 - x1)) {
            return invalid(format!("epsilon must lie in (0, (x2 - x1)/2), got {eps}"));
        }
        let wmax = window_weight_max(rule, x1 - eps, x2 + eps);
        if !(wmax > 0.0 && wmax.is_finite()) {
            return invalid("weighting function is not positive and bounded on the exploit window");
        }
        Ok(eps / wmax)
    }

    /// Parameter checks, including the step-size guard `dt <= delta^2 / 100`
    /// for every tracking band.
    pub fn validate(&self, rule: &PricingRule, dt: f64) -> Result<(), StrategyError> {
        let guard = |delta: f64| -> Result<(), StrategyError> {
            if dt > delta * delta / 100.0 * (1.0 + 1e-9) {
                return invalid(format!("dt = {dt} exceeds delta^2/100 = {} for tracking band {delta}", delta * delta / 100.0));
            }
            Ok(())
        };
        match self {
            StrategyConfig::Zero => Ok(()),
            StrategyConfig::Bridge { band } => {
                if !(*band > 0.0) || !band.is_finite() {
                    return invalid("bridge band must be positive and finite");
                }
                guard(1.0)
            }
            StrategyConfig::Tracker { target, delta } => {
                if !(*delta > 0.0) || !delta.is_finite() {
                    return invalid("tracker delta must be positive and finite");
                }
                guard(*delta)?;
                let k = target.knots()?;
                let u0 = kw(rule, 0.0, 0.0)? - kw(rule, 0.0, k.at(0.0))?;
                if u0.abs() >= *delta {
                    return invalid(format!("target starts {u0} away from the initial signal, outside delta = {delta}"));
                }
                Ok(())
            }
            StrategyConfig::ExploitC { t1, t2, x1, x2, b, epsilon } => {
                for (n, v) in [("t1", t1), ("t2", t2), ("x1", x1), ("x2", x2), ("b", b)] {
                    check_finite(n, *v)?;
                }
                if !(0.0 < *t1 && t1 < t2 && *t2 < 1.0) {
                    return invalid("windows must satisfy 0 < t1 < t2 < 1");
                }
                if x1 >= x2 {
                    return invalid("windows must satisfy x1 < x2");
                }
                guard(Self::exploit_delta(rule, *x1, *x2, *epsilon)?)
            }
            StrategyConfig::ExploitJ { t1, t2, x1, x2, n_jumps, kappa, epsilon } => {
                for (n, v) in [("t1", t1), ("t2", t2), ("x1", x1), ("x2", x2), ("kappa", kappa)] {
                    check_finite(n, *v)?;
                }
                if !(0.0 < *t1 && t1 < t2 && *t2 < 1.0) {
                    return invalid("windows must satisfy 0 < t1 < t2 < 1");
                }
                if x1 >= x2 {
                    return invalid("windows must satisfy x1 < x2");
                }
                if *n_jumps == 0 {
                    return invalid("n_jumps must be at least 1");
                }
                if *kappa == 0.0 {
                    return invalid("kappa must be non-zero");
                }
                guard(Self::exploit_delta(rule, *x1, *x2, *epsilon)?)
            }
            StrategyConfig::Scripted { segments, jumps } => {
                for s in segments {
                    for (n, v) in [("until", s.until), ("drift", s.drift), ("load", s.load)] {
                        check_finite(n, v)?;
                    }
                }
                if segments.windows(2).any(|w| w[1].until <= w[0].until) {
                    return invalid("segment end times must increase");
                }
                for j in jumps {
                    check_finite("jump time", j.t)?;
                    check_finite("jump size", j.size)?;
                    if !(j.t > 0.0 && j.t < 1.0) || j.size == 0.0 {
                        return invalid("jumps need 0 < t < 1 and non-zero size");
                    }
                }
                Ok(())
            }
        }
    }

    /// Fresh per-path strategy on a grid of step `dt`.
    pub fn build(&self, rule: &Arc<PricingRule>, dt: f64) -> Result<Box<dyn Strategy>, StrategyError> {
        Ok(match self {
            StrategyConfig::Zero => Box::new(ZeroStrategy),
            StrategyConfig::Bridge { band } => Box::new(BridgeStrategy::new(Arc::clone(rule), *band)),
            StrategyConfig::Tracker { target, delta } => Box::new(TrackerStrategy(Tracker::new(
                Arc::clone(rule),
                target.knots()?,
                TargetSpace::Signal,
                *delta,
            ))),
            StrategyConfig::ExploitC { t1, t2, x1, x2, b, epsilon } => {
                let delta = Self::exploit_delta(rule, *x1, *x2, *epsilon)?;
                Box::new(ExploitC::new(Arc::clone(rule), (*t1, *t2), (*x1, *x2), *b, delta, dt)?)
            }
            StrategyConfig::ExploitJ { t1, t2, x1, x2, n_jumps, kappa, epsilon } => {
                let delta = Self::exploit_delta(rule, *x1, *x2, *epsilon)?;
                Box::new(ExploitJ::new(Arc::clone(rule), (*t1, *t2), (*x1, *x2), *n_jumps, *kappa, delta, dt)?)
            }
            StrategyConfig::Scripted { segments, jumps } => {
                let mut js: Vec<(f64, f64)> = jumps.iter().map(|j| (j.t, j.size)).collect();
                js.sort_by(|a, b| a.0.total_cmp(&b.0));
                Box::new(ScriptedStrategy::new(segments.clone(), js))
            }
        })
    }
}
