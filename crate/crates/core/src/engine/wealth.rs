//! Three views of the insider's terminal wealth: the direct P&L sum, its
//! integration-by-parts form, and the decomposition into value potential,
//! penalty and jump terms.

use serde::{Deserialize, Serialize};

use crate::engine::PathRecord;
use crate::error::MathError;
use crate::market::PricingRule;
use crate::mathcore::{g_cost, psi, psi_increment};

/// `sum theta (S_{k+1-} - S_k) + sum_jumps theta_- dS + (f - S_N) theta_N`.
pub fn wealth_direct(rec: &PathRecord) -> f64 {
    let n = rec.n_nodes() - 1;
    let (s_left, _) = rec.left_limits();
    let mut w = 0.0;
    for k in 0..n {
        w += rec.theta[k] * (s_left[k + 1] - rec.s[k]);
    }
    for ev in &rec.jumps {
        w += ev.theta_pre * ev.ds();
    }
    w + (rec.payoff - rec.s[n]) * rec.theta[n]
}

/// `f theta_N - int S_- dtheta - [theta, S]`, with the continuous covariation
/// `b (1 + b) H_x w dt` taken from the declared loading.
pub fn wealth_ibp(rec: &PathRecord) -> f64 {
    let n = rec.n_nodes() - 1;
    let (_, theta_left) = rec.left_limits();
    let mut w = rec.payoff * rec.theta[n];
    for k in 0..n {
        let b = rec.load[k];
        w -= rec.s[k] * (theta_left[k + 1] - rec.theta[k]);
        w -= b * (1.0 + b) * rec.hxw[k] * rec.step_dt(k);
    }
    for ev in &rec.jumps {
        w -= ev.s_pre * ev.dtheta + ev.dtheta * ev.ds();
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WealthBreakdown {
    pub psi0: f64,
    pub psi1: f64,
    /// `-1/2 int w H_x d[theta,theta]^c`
    pub qv_term: f64,
    /// `int (S - a) c (d[Y,Y]^c - dt)`
    pub c_term: f64,
    /// `int int_{xi}^{X} (H - a) g du dt`, entering the total with a minus sign.
    pub g_term: f64,
    pub jump_sum: f64,
    /// `psi0 - psi1 + qv_term + c_term - g_term + jump_sum`
    pub total: f64,
    /// `int (S - a) dB`: zero-mean noise separating `total` from the
    /// path's direct wealth. Not part of `total`.
    pub noise_integral: f64,
}

/// Decomposition of a path's wealth at `a = f(Z_1)`.
pub fn wealth_decomposition(rec: &PathRecord, rule: &PricingRule) -> Result<WealthBreakdown, MathError> {
    let a = rec.payoff;
    let n = rec.n_nodes() - 1;
    let psi0 = psi(rule, 0.0, rec.x[0], a)?;
    let psi1 = psi(rule, 1.0, rec.x[n], a)?;
    let (mut qv_term, mut c_term, mut g_term, mut noise) = (0.0, 0.0, 0.0, 0.0);
    let c_zero = rule.c.is_zero();
    let g_zero = rule.g.is_zero();
    for k in 0..n {
        let (t, x, dt) = (rec.t[k], rec.x[k], rec.step_dt(k));
        let b = rec.load[k];
        qv_term -= 0.5 * rec.hxw[k] * b * b * dt;
        if !c_zero {
            let q = (1.0 + b) * (1.0 + b);
            c_term += (rec.s[k] - a) * rule.c.eval(t, x) * (q - 1.0) * dt;
        }
        if !g_zero {
            g_term += g_cost(rule, t, x, a)?.signed * dt;
        }
        noise += (rec.s[k] - a) * (rec.b[k + 1] - rec.b[k]);
    }
    let mut jump_sum = 0.0;
    for ev in &rec.jumps {
        jump_sum += psi_increment(rule, ev.t, ev.x_pre, ev.x_post, a)? - (ev.s_post - a) * ev.dtheta;
    }
    let total = psi0 - psi1 + qv_term + c_term - g_term + jump_sum;
    Ok(WealthBreakdown { psi0, psi1, qv_term, c_term, g_term, jump_sum, total, noise_integral: noise })
}

/// Slacks of the two-sided bound on a jump's contribution
/// `L = dPsi - (S - a) dtheta`:
/// `upper = (S - a) j - L` and `lower = L - ((S_- - a) j - dS dtheta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpBound {
    pub t: f64,
    pub contribution: f64,
    pub upper_slack: f64,
    pub lower_slack: f64,
}

impl JumpBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.upper_slack >= -tol && self.lower_slack >= -tol
    }
}

pub fn check_jump_bounds(rec: &PathRecord, rule: &PricingRule) -> Result<Vec<JumpBound>, MathError> {
    let a = rec.payoff;
    rec.jumps
        .iter()
        .map(|ev| {
            let l = psi_increment(rule, ev.t, ev.x_pre, ev.x_post, a)? - (ev.s_post - a) * ev.dtheta;
            let j = rule.j.eval(ev.t, ev.x_pre, ev.dy());
            Ok(JumpBound {
                t: ev.t,
                contribution: l,
                upper_slack: (ev.s_post - a) * j - l,
                lower_slack: l - ((ev.s_pre - a) * j - ev.ds() * ev.dtheta),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate_path, SimConfig};
    use crate::market::catalog::{back_identity, back_lognormal, penalized};
    use crate::market::{Payoff, SignalModel};
    use crate::strategies::{ScriptJump, Segment, StrategyConfig};

    fn hold_one() -> StrategyConfig {
        StrategyConfig::Scripted { segments: vec![], jumps: vec![ScriptJump { t: 0.01, size: 1.0 }] }
    }

    #[test]
    fn zero_position_earns_nothing() {
        let c = SimConfig::new(back_identity(), SignalModel::fixed(1.0), StrategyConfig::Zero, 1e-2, 1);
        let rec = simulate_path(&c, 0).unwrap();
        assert_eq!(wealth_direct(&rec), 0.0);
        assert_eq!(wealth_ibp(&rec), 0.0);
    }

    #[test]
    fn held_unit_position_telescopes() {
        // A unit bought at the first interior node and held: f - S at purchase.
        let c = SimConfig::new(back_lognormal(), SignalModel::fixed(0.3).with_payoff(Payoff::Exp), hold_one(), 1e-2, 2);
        let rec = simulate_path(&c, 0).unwrap();
        let ev = rec.jumps[0];
        let want = rec.payoff - ev.s_post + 0.0 * ev.s_pre;
        // Direct: the jump itself is bought at theta_- = 0; afterwards theta = 1.
        assert!((wealth_direct(&rec) - want).abs() < 1e-12);
        assert!((wealth_ibp(&rec) - want).abs() < 1e-12);
    }

    #[test]
    fn finite_variation_has_no_penalty_terms() {
        let s = StrategyConfig::Scripted { segments: vec![Segment { until: 1.0, drift: 0.7, load: 0.0 }], jumps: vec![] };
        let c = SimConfig::new(back_identity(), SignalModel::fixed(1.0), s, 1e-2, 3);
        let rec = simulate_path(&c, 0).unwrap();
        let d = wealth_decomposition(&rec, &c.rule).unwrap();
        assert_eq!((d.qv_term, d.c_term, d.g_term, d.jump_sum), (0.0, 0.0, 0.0, 0.0));
        assert!((d.psi0 - 1.0).abs() < 1e-12);
        assert_eq!(d.total, d.psi0 - d.psi1);
        // Drift-only trading: the forms differ only by the discrete covariation.
        let cross: f64 = (0..rec.n_nodes() - 1)
            .map(|k| (rec.theta[k + 1] - rec.theta[k]) * (rec.s[k + 1] - rec.s[k]))
            .sum();
        assert!((wealth_direct(&rec) - wealth_ibp(&rec) + cross).abs() < 1e-12);
    }

    #[test]
    fn total_is_sum_of_terms() {
        let s = StrategyConfig::Scripted {
            segments: vec![Segment { until: 1.0, drift: 0.2, load: 1.0 }],
            jumps: vec![ScriptJump { t: 0.5, size: -0.4 }],
        };
        let rule = penalized(back_identity(), 0.5, 0.5);
        let c = SimConfig::new(rule, SignalModel::fixed(-1.0), s, 1e-2, 4);
        let rec = simulate_path(&c, 0).unwrap();
        let d = wealth_decomposition(&rec, &c.rule).unwrap();
        assert_eq!(d.total, d.psi0 - d.psi1 + d.qv_term + d.c_term - d.g_term + d.jump_sum);
        assert!((d.qv_term + 0.5).abs() < 1e-12);
        assert!(d.c_term != 0.0 && d.jump_sum != 0.0);
    }

    #[test]
    fn jump_contribution_matches_quadratic_oracle() {
        // H = x, w = 1, j = 0: Psi^a(t, x) - Psi^a(t, x-) = ((x-a)^2 - (x_- - a)^2)/2.
        let c = SimConfig::new(back_identity(), SignalModel::fixed(0.5), hold_one(), 1e-2, 5);
        let rec = simulate_path(&c, 0).unwrap();
        let bounds = check_jump_bounds(&rec, &c.rule).unwrap();
        assert_eq!(bounds.len(), 1);
        let ev = rec.jumps[0];
        let a = 0.5;
        let want = 0.5 * ((ev.x_post - a).powi(2) - (ev.x_pre - a).powi(2)) - (ev.x_post - a);
        assert!((bounds[0].contribution - want).abs() < 1e-12);
        assert!((bounds[0].contribution + 0.5).abs() < 1e-12);
        assert!(bounds[0].holds(1e-9));
        assert!(bounds[0].upper_slack >= 0.0);
    }

    #[test]
    fn no_jumps_no_bounds() {
        let c = SimConfig::new(back_identity(), SignalModel::fixed(0.5), StrategyConfig::Zero, 1e-2, 5);
        assert!(check_jump_bounds(&simulate_path(&c, 0).unwrap(), &c.rule).unwrap().is_empty());
    }
}
