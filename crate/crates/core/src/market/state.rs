use serde::{Deserialize, Serialize};

use crate::error::MathError;
use crate::market::PricingRule;
use crate::mathcore::{kw, kw_inv};

/// Market-maker side of one path: the signal `X`, total demand `Y` and the
/// continuous quadratic-variation accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub qv_theta_c: f64,
    pub qv_y_c: f64,
}

impl MarketState {
    pub fn initial() -> Self {
        Self { t: 0.0, x: 0.0, y: 0.0, qv_theta_c: 0.0, qv_y_c: 0.0 }
    }
}

/// Advances `X` over `[t, t + dt]` given the continuous demand increment
/// `dyc` and the declared rate `qv_rate = d[Y,Y]^c / dt`.
///
/// The update is `w dYc + (w_x/2 + c) w (qv_rate - 1) dt` plus the Milstein
/// term `w w_x (dYc^2 - qv_rate dt) / 2`, which vanishes when `w_x = 0`.
/// Only `qv_y_c` is advanced; `qv_theta_c` depends on the strategy's loading
/// and is the caller's business.
pub fn step_continuous(
    rule: &PricingRule,
    state: &MarketState,
    dyc: f64,
    qv_rate: f64,
    dt: f64,
) -> Result<MarketState, MathError> {
    let (t, x) = (state.t, state.x);
    let w = rule.w.eval(t, x);
    if !(w > 0.0) {
        return Err(MathError::NonPositiveW { t, x, w });
    }
    let wx = rule.w.d_x(t, x);
    let c = rule.c.eval(t, x);
    let dx = w * dyc
        + 0.5 * w * wx * (dyc * dyc - qv_rate * dt)
        + (0.5 * wx + c) * w * (qv_rate - 1.0) * dt;
    Ok(MarketState {
        t: t + dt,
        x: x + dx,
        y: state.y + dyc,
        qv_theta_c: state.qv_theta_c,
        qv_y_c: state.qv_y_c + qv_rate * dt,
    })
}

/// Applies a demand jump `dy` at the current time:
/// `X <- K_w^{-1}(t, j(t, X-, dy) + K_w(t, X-) + dy)`.
pub fn apply_jump(rule: &PricingRule, state: &MarketState, dy: f64) -> Result<MarketState, MathError> {
    let t = state.t;
    if dy == 0.0 {
        return Err(MathError::ZeroJump { t });
    }
    let target = rule.j.eval(t, state.x, dy) + kw(rule, t, state.x)? + dy;
    Ok(MarketState {
        x: kw_inv(rule, t, target)?,
        y: state.y + dy,
        ..*state
    })
}

/// Quoted price `H(t, x)`.
pub fn price(rule: &PricingRule, t: f64, x: f64) -> f64 {
    rule.h.eval(t, x)
}
