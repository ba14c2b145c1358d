//! Kernels of the pricing-rule calculus: the `K_w` transform and its
//! inverse, the price inverse `xi`, the value potential `Psi^a`, PDE
//! residuals and the `g`-cost functionals.

use std::cell::Cell;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::MathError;
use crate::market::{JumpPenalty, PricingRule};
use crate::mathcore::root::{solve_increasing, RootFailure};
use crate::mathcore::Func2;

fn finite(v: f64, what: &'static str, t: f64, x: f64) -> Result<f64, MathError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MathError::NonFinite { what, t, x })
    }
}

/// `int_0^x dy / w(t, y)`.
fn kw_space(rule: &PricingRule, t: f64, x: f64) -> Result<f64, MathError> {
    let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
    let v = rule.quad.integrate(
        |y| {
            let w = rule.w.eval(t, y);
            if w > 0.0 {
                1.0 / w
            } else {
                if bad.get().is_none() {
                    bad.set(Some((y, w)));
                }
                0.0
            }
        },
        0.0,
        x,
    );
    if let Some((y, w)) = bad.get() {
        return Err(MathError::NonPositiveW { t, x: y, w });
    }
    v
}

/// `(1/2) int_0^t w_x(s, 0) ds`.
pub fn kw_time_part(rule: &PricingRule, t: f64) -> Result<f64, MathError> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * rule.quad.integrate(|s| rule.w.d_x(s, 0.0), 0.0, t)?)
}

/// The transform `K_w(t, x) = int_0^x dy/w(t,y) + (1/2) int_0^t w_x(s,0) ds`.
pub fn kw(rule: &PricingRule, t: f64, x: f64) -> Result<f64, MathError> {
    if let Some(k) = &rule.closed.kw {
        return finite(k(t, x), "K_w", t, x);
    }
    Ok(kw_space(rule, t, x)? + kw_time_part(rule, t)?)
}

/// Inverse of `K_w(t, .)`.
///
/// `NotOnto` means the bracket expansion passed `|x| = 1e12`: a heuristic
/// signal that `K_w(t, .)` is not onto the real line.
pub fn kw_inv(rule: &PricingRule, t: f64, y: f64) -> Result<f64, MathError> {
    if let Some(k) = &rule.closed.kw_inv {
        return finite(k(t, y), "K_w inverse", t, y);
    }
    let shifted = y - kw_time_part(rule, t)?;
    solve_increasing(|x| kw_space(rule, t, x), shifted).map_err(|e| match e {
        RootFailure::Unbracketed => MathError::NotOnto { t, y },
        RootFailure::Eval(e) => e,
    })
}

/// The unique `xi` with `H(t, xi) = a`.
pub fn xi(rule: &PricingRule, t: f64, a: f64) -> Result<f64, MathError> {
    if let Some(inv) = &rule.closed.h_inv {
        let v = inv(t, a);
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(MathError::NotInRange { t, a })
        };
    }
    solve_increasing(|x| Ok(rule.h.eval(t, x)), a).map_err(|e| match e {
        RootFailure::Unbracketed => MathError::NotInRange { t, a },
        RootFailure::Eval(e) => e,
    })
}

/// `int_{x0}^{x1} (H(t,u) - a) / w(t,u) du`; the spatial increment of `Psi^a`.
pub fn psi_increment(rule: &PricingRule, t: f64, x0: f64, x1: f64, a: f64) -> Result<f64, MathError> {
    rule.quad
        .integrate(|u| (rule.h.eval(t, u) - a) / rule.w.eval(t, u), x0, x1)
}

/// `(1/2) int_t^1 H_x(s, xi(s,a)) w(s, xi(s,a)) ds`.
pub fn psi_time_part(rule: &PricingRule, t: f64, a: f64) -> Result<f64, MathError> {
    if t >= 1.0 {
        return Ok(0.0);
    }
    let err: Cell<Option<MathError>> = Cell::new(None);
    let v = rule.quad.integrate(
        |s| match xi(rule, s, a) {
            Ok(x) => rule.h.d_x(s, x) * rule.w.eval(s, x),
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        },
        t,
        1.0,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(0.5 * v),
    }
}

/// The insider's value potential
/// `Psi^a(t,x) = int_{xi(t,a)}^x (H(t,u)-a)/w(t,u) du + (1/2) int_t^1 H_x w (s, xi(s,a)) ds`.
pub fn psi(rule: &PricingRule, t: f64, x: f64, a: f64) -> Result<f64, MathError> {
    let x0 = xi(rule, t, a)?;
    Ok(psi_increment(rule, t, x0, x, a)? + psi_time_part(rule, t, a)?)
}

/// Residuals `(w_t + w^2 w_xx / 2 - w^2 g, H_t + w^2 H_xx / 2)`.
pub fn pde_residuals(rule: &PricingRule, t: f64, x: f64) -> (f64, f64) {
    let w = rule.w.eval(t, x);
    let w2 = w * w;
    let rw = rule.w.d_t(t, x) + 0.5 * w2 * rule.w.d_xx(t, x) - w2 * rule.g.eval(t, x);
    let rh = rule.h.d_t(t, x) + 0.5 * w2 * rule.h.d_xx(t, x);
    (rw, rh)
}

/// Finite-difference residual of `Psi^a_t + w^2 Psi^a_xx / 2 + int_{xi}^x (H-a) g du`
/// with step `h` in both variables.
pub fn psi_pde_residual(rule: &PricingRule, t: f64, x: f64, a: f64, h: f64) -> Result<f64, MathError> {
    let p = |tt: f64, xx: f64| psi(rule, tt, xx, a);
    let psi_t = if t < h {
        (p(t + h, x)? - p(t, x)?) / h
    } else if t > 1.0 - h {
        (p(t, x)? - p(t - h, x)?) / h
    } else {
        (p(t + h, x)? - p(t - h, x)?) / (2.0 * h)
    };
    let psi_xx = (p(t, x + h)? - 2.0 * p(t, x)? + p(t, x - h)?) / (h * h);
    let w = rule.w.eval(t, x);
    Ok(psi_t + 0.5 * w * w * psi_xx + g_cost(rule, t, x, a)?.signed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCost {
    /// `int_{xi(t,a)}^x (H(t,u) - a) g(t,u) du`
    pub signed: f64,
    /// Same integral with `|g|`.
    pub absolute: f64,
}

pub fn g_cost(rule: &PricingRule, t: f64, x: f64, a: f64) -> Result<GCost, MathError> {
    if rule.g.is_zero() {
        return Ok(GCost { signed: 0.0, absolute: 0.0 });
    }
    let x0 = xi(rule, t, a)?;
    let signed = rule
        .quad
        .integrate(|u| (rule.h.eval(t, u) - a) * rule.g.eval(t, u), x0, x)?;
    let absolute = rule
        .quad
        .integrate(|u| (rule.h.eval(t, u) - a) * rule.g.eval(t, u).abs(), x0, x)?;
    Ok(GCost { signed, absolute })
}

/// `G(t, x) = int_0^x g(t, y) dy`.
pub fn g_primitive(rule: &PricingRule, t: f64, x: f64) -> Result<f64, MathError> {
    if rule.g.is_zero() {
        return Ok(0.0);
    }
    rule.quad.integrate(|y| rule.g.eval(t, y), 0.0, x)
}

/// Minimizer of `x -> int_{xi(t,a)}^x (H(t,y) - a) g(t,y) dy` over `window`.
///
/// Grid scan with `grid_n` points, then golden-section search over the
/// cells adjacent to the best node. Ties go to the smallest `x`; the refined
/// point replaces the grid point only on strict improvement.
pub fn g_argmin(
    rule: &PricingRule,
    t: f64,
    a: f64,
    window: (f64, f64),
    grid_n: usize,
) -> Result<f64, MathError> {
    let (lo, hi) = window;
    assert!(grid_n >= 2 && lo < hi, "g_argmin needs a bounded window and grid_n >= 2");
    let objective = |x: f64| g_cost(rule, t, x, a).map(|c| c.signed);
    let step = (hi - lo) / (grid_n - 1) as f64;
    let node = |i: usize| if i + 1 == grid_n { hi } else { lo + i as f64 * step };
    let mut best_i = 0;
    let mut best_v = objective(lo)?;
    for i in 1..grid_n {
        let v = objective(node(i))?;
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let left = node(best_i.saturating_sub(1));
    let right = node((best_i + 1).min(grid_n - 1));
    let refined = golden_section(&objective, left, right, 1e-10)?;
    let refined_v = objective(refined)?;
    Ok(if refined_v < best_v { refined } else { node(best_i) })
}

fn golden_section(
    f: &impl Fn(f64) -> Result<f64, MathError>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<f64, MathError> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Transports a rule onto the identity price map: `H~(t,s) = s`,
/// `w~(t,s) = H_x w (t, H^{-1}(t,s))`, `g~ = g / H_x`, and `c`, `j`
/// composed with `H^{-1}`. Under the same order flow the reduced signal
/// reproduces the original price path `H(t, X_t)`.
pub fn reduce_to_identity(rule: &PricingRule) -> Result<PricingRule, MathError> {
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        for i in 0..=20 {
            let x = -5.0 + 0.5 * i as f64;
            let s = rule.h.eval(t, x);
            match xi(rule, t, s) {
                Ok(back) if (back - x).abs() <= 1e-6 * (1.0 + x.abs()) => {}
                _ => return Err(MathError::NotInvertible { t, s }),
            }
        }
    }
    let base = Arc::new(rule.clone());
    let inv = {
        let base = Arc::clone(&base);
        move |t: f64, s: f64| xi(&base, t, s).unwrap_or(f64::NAN)
    };

    let w_tilde = {
        let (b, inv) = (Arc::clone(&base), inv.clone());
        let (b2, inv2) = (Arc::clone(&base), inv.clone());
        Func2::new(move |t, s| {
            let u = inv(t, s);
            b.h.d_x(t, u) * b.w.eval(t, u)
        })
        .with_dx(move |t, s| {
            let u = inv2(t, s);
            let hx = b2.h.d_x(t, u);
            (b2.h.d_xx(t, u) * b2.w.eval(t, u) + hx * b2.w.d_x(t, u)) / hx
        })
    };
    let g_tilde = if rule.g.is_zero() {
        Func2::zero()
    } else {
        let (b, inv) = (Arc::clone(&base), inv.clone());
        Func2::new(move |t, s| {
            let u = inv(t, s);
            b.g.eval(t, u) / b.h.d_x(t, u)
        })
    };
    let c_tilde = if rule.c.is_zero() {
        Func2::zero()
    } else {
        let (b, inv) = (Arc::clone(&base), inv.clone());
        Func2::new(move |t, s| b.c.eval(t, inv(t, s)))
    };
    let j_tilde = if rule.j.is_zero() {
        JumpPenalty::zero()
    } else {
        let (b, inv) = (Arc::clone(&base), inv);
        JumpPenalty::new(move |t, s, k| b.j.eval(t, inv(t, s), k))
    };

    Ok(PricingRule::new(format!("{}~identity", rule.name), Func2::identity(), w_tilde)
        .with_c(c_tilde)
        .with_j(j_tilde)
        .with_g(g_tilde)
        .with_h_inv(|_, a| a))
}
