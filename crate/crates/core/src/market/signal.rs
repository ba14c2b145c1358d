use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::MathError;
use crate::market::PricingRule;
use crate::mathcore::{kw, xi};

/// Increasing payoff map `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payoff {
    Identity,
    Exp,
    /// `scale * z + shift` with `scale > 0`.
    Affine { scale: f64, shift: f64 },
}

impl Payoff {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Payoff::Identity => z,
            Payoff::Exp => z.exp(),
            Payoff::Affine { scale, shift } => scale * z + shift,
        }
    }

    pub fn is_increasing(&self) -> bool {
        match *self {
            Payoff::Affine { scale, .. } => scale > 0.0,
            _ => true,
        }
    }
}

/// Law of the insider's initial signal `Z_0` when it is randomized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Z0Law {
    Point,
    Normal { mean: f64, sd: f64 },
}

/// Evolution of the signal after time 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalDynamics {
    /// `Z_1 = Z_0`.
    Static,
    /// `Z_t = Z_0 + vol * W_t` with `W` independent of the noise trades.
    Brownian { vol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalModel {
    pub z: f64,
    pub payoff: Payoff,
    #[serde(default = "static_dynamics")]
    pub dynamics: SignalDynamics,
    #[serde(default = "point_law")]
    pub z0_law: Z0Law,
}

fn static_dynamics() -> SignalDynamics {
    SignalDynamics::Static
}

fn point_law() -> Z0Law {
    Z0Law::Point
}

/// Nodes used for the conditional expectation defining `M` under dynamic signals.
const HERMITE_NODES: usize = 40;

impl SignalModel {
    pub fn fixed(z: f64) -> Self {
        Self { z, payoff: Payoff::Identity, dynamics: SignalDynamics::Static, z0_law: Z0Law::Point }
    }

    pub fn with_payoff(mut self, payoff: Payoff) -> Self {
        self.payoff = payoff;
        self
    }

    pub fn with_z0_law(mut self, law: Z0Law) -> Self {
        self.z0_law = law;
        self
    }

    pub fn with_dynamics(mut self, dynamics: SignalDynamics) -> Self {
        self.dynamics = dynamics;
        self
    }

    pub fn is_static(&self) -> bool {
        matches!(self.dynamics, SignalDynamics::Static)
    }

    /// `K_w(1, H^{-1}(1, f(z1)))`, the demand level at which the terminal
    /// price equals the payoff.
    pub fn demand_target(&self, rule: &PricingRule, z1: f64) -> Result<f64, MathError> {
        kw(rule, 1.0, xi(rule, 1.0, self.payoff.eval(z1))?)
    }

    /// `M_t` given the current signal value `z_t`.
    pub fn m(&self, rule: &PricingRule, t: f64, z_t: f64) -> Result<f64, MathError> {
        match self.dynamics {
            SignalDynamics::Static => self.demand_target(rule, z_t),
            SignalDynamics::Brownian { vol } => {
                let sd = vol * (1.0 - t).max(0.0).sqrt();
                if sd == 0.0 {
                    return self.demand_target(rule, z_t);
                }
                let (nodes, weights) = gauss_hermite(HERMITE_NODES);
                let mut acc = 0.0;
                for (x, w) in nodes.iter().zip(&weights) {
                    acc += w * self.demand_target(rule, z_t + sd * std::f64::consts::SQRT_2 * x)?;
                }
                Ok(acc / std::f64::consts::PI.sqrt())
            }
        }
    }
}

/// Gauss-Hermite rule for weight `exp(-x^2)` by the Golub-Welsch eigenproblem.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let off = (i as f64 / 2.0).sqrt();
        jac[(i, i - 1)] = off;
        jac[(i - 1, i)] = off;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Samples `sigma^2(t) (1-t)^(alpha-1)` along `times`, where `sigma^2` is
/// the instantaneous variance rate of `M` at signal level `z_t`, estimated
/// by a central difference of `M` in the signal. Only meaningful for
/// Brownian signals; a static signal has `sigma = 0`.
pub fn mqv_profile(
    signal: &SignalModel,
    rule: &PricingRule,
    alpha: f64,
    z_t: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>, MathError> {
    let vol = match signal.dynamics {
        SignalDynamics::Static => return Ok(times.iter().map(|&t| (t, 0.0)).collect()),
        SignalDynamics::Brownian { vol } => vol,
    };
    let h = 1e-4 * (1.0 + z_t.abs());
    times
        .iter()
        .map(|&t| {
            let dm = (signal.m(rule, t, z_t + h)? - signal.m(rule, t, z_t - h)?) / (2.0 * h);
            let sigma2 = dm * dm * vol * vol;
            Ok((t, sigma2 * (1.0 - t).powf(alpha - 1.0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::catalog::{back_identity, back_lognormal, g_positive};

    #[test]
    fn hermite_rule_integrates_moments() {
        let (x, w) = gauss_hermite(20);
        let total: f64 = w.iter().sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let second: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((second - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn static_target_matches_closed_forms() {
        let s = SignalModel::fixed(1.3);
        assert!((s.m(&back_identity(), 0.4, 1.3).unwrap() - 1.3).abs() < 1e-12);
        // K(1, x) = x / 2 under the g-positive rule.
        assert!((s.m(&g_positive(), 0.4, 1.3).unwrap() - 0.65).abs() < 1e-12);
        let lognormal = SignalModel::fixed(0.2).with_payoff(Payoff::Exp);
        assert!((lognormal.m(&back_lognormal(), 0.0, 0.2).unwrap() - 0.2).abs() < 1e-10);
    }

    #[test]
    fn brownian_signal_projects_linear_target() {
        let s = SignalModel::fixed(0.0).with_dynamics(SignalDynamics::Brownian { vol: 0.7 });
        // Linear target: the projection is the current signal.
        assert!((s.m(&back_identity(), 0.3, 0.9).unwrap() - 0.9).abs() < 1e-10);
        // Convex target exp(z): E[exp(Z_1) | Z_t] = exp(z_t + vol^2 (1-t) / 2).
        let e = s.with_payoff(Payoff::Exp);
        let want = (0.9f64 + 0.49 * 0.7 / 2.0).exp();
        assert!((e.m(&back_identity(), 0.3, 0.9).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn mqv_profile_of_static_signal_is_zero() {
        let p = mqv_profile(&SignalModel::fixed(1.0), &back_identity(), 0.5, 1.0, &[0.9, 0.99]).unwrap();
        assert!(p.iter().all(|&(_, v)| v == 0.0));
        let b = SignalModel::fixed(0.0).with_dynamics(SignalDynamics::Brownian { vol: 2.0 });
        let p = mqv_profile(&b, &back_identity(), 1.0, 0.0, &[0.5]).unwrap();
        assert!((p[0].1 - 4.0).abs() < 1e-6);
    }
}
