//! One-dimensional quadrature.
//!
//! Adaptive Simpson is the default. Long intervals are first cut at the
//! points `0, ±1, ±2, ±4, ...` so that each panel spans a bounded dynamic
//! range; this keeps the bracket-expansion probes of the K transform (which
//! reach `|x| = 1e12`) within the depth limit.

use serde::{Deserialize, Serialize};

use crate::error::MathError;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMethod {
    Adaptive,
    FixedPanel,
}

/// How integrals are evaluated. `panels` is the panel count of the fixed
/// composite rule, and the initial panel count of the adaptive one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub panels: u32,
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::Adaptive,
            panels: 1,
            tol: DEFAULT_TOL,
        }
    }
}

impl QuadratureSpec {
    pub fn fixed(panels: u32) -> Self {
        Self {
            method: QuadratureMethod::FixedPanel,
            panels,
            tol: DEFAULT_TOL,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, MathError> {
        match self.method {
            QuadratureMethod::Adaptive => adaptive_simpson(&f, a, b, self.tol, self.panels.max(1)),
            QuadratureMethod::FixedPanel => Ok(composite_simpson(&f, a, b, self.panels.max(1))),
        }
    }

    /// Whether doubling the panel count moves the integral by less than `tol`.
    pub fn self_consistent(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<bool, MathError> {
        let coarse = self.integrate(&f, a, b)?;
        let finer = QuadratureSpec {
            panels: self.panels.max(1) * 2,
            ..*self
        };
        let fine = finer.integrate(&f, a, b)?;
        Ok((fine - coarse).abs() < self.tol)
    }
}

/// Composite Simpson rule with `panels` panels.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = panels.max(1) as usize;
    let h = (b - a) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let l = a + i as f64 * h;
        let r = if i + 1 == n { b } else { l + h };
        let m = 0.5 * (l + r);
        acc += (r - l) / 6.0 * (f(l) + 4.0 * f(m) + f(r));
    }
    acc
}

/// Adaptive Simpson integration to absolute tolerance `tol` with depth
/// limit [`DEFAULT_MAX_DEPTH`].
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    initial_panels: u32,
) -> Result<f64, MathError> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return adaptive_simpson(f, b, a, tol, initial_panels).map(|v| -v);
    }
    let cuts = split_points(a, b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let n = initial_panels.max(1) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for i in 0..n {
            let l = w[0] + i as f64 * h;
            let r = if i + 1 == n { w[1] } else { l + h };
            total += panel(&f, l, r, tol)?;
        }
    }
    Ok(total)
}

fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, MathError> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut ok = true;
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, DEFAULT_MAX_DEPTH, &mut ok);
    if !v.is_finite() {
        return Err(MathError::NonFinite {
            what: "quadrature integrand",
            t: f64::NAN,
            x: m,
        });
    }
    if ok {
        Ok(v)
    } else {
        Err(MathError::QuadratureFailure { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    ok: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if delta.abs() <= 15.0 * tol.max(floor) || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    if depth == 0 || m <= a || m >= b {
        *ok = false;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok)
}

/// Cut points of `[a, b]` at `0, ±1, ±2, ±4, ...`; short intervals are left whole.
fn split_points(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    if b - a > 2.0 {
        let mut marks = vec![0.0];
        let mut p = 1.0;
        while p < a.abs().max(b.abs()) {
            marks.push(p);
            marks.push(-p);
            p *= 2.0;
        }
        marks.sort_by(f64::total_cmp);
        pts.extend(marks.into_iter().filter(|&m| m > a && m < b));
    }
    pts.push(b);
    pts
}
