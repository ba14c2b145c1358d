//! Grid checks of a pricing rule's admissibility conditions.

use serde::{Deserialize, Serialize};

use crate::batch::config::{RunConfig, ValidationWindow};
use crate::error::BatchError;
use crate::market::PricingRule;
use crate::mathcore::{kw_inv, pde_residuals};

/// Relative PDE residual accepted on the grid.
pub const PDE_TOL: f64 = 1e-6;
/// Times and levels at which `K_w(t, .)` must be invertible.
pub const ONTO_TIMES: [f64; 3] = [0.0, 0.5, 1.0];
pub const ONTO_LEVELS: [f64; 4] = [-1e3, -10.0, 10.0, 1e3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Warn,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        let status = if passed { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, detail: detail.into() }
    }

    pub fn with_status(name: &str, status: Status, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status, detail: detail.into() }
    }
}

/// Named checks; comma-separated table with header `check,status,detail`.
pub fn check_table(checks: &[CheckResult]) -> String {
    let mut out = String::from("check,status,detail\n");
    for c in checks {
        let status = serde_json::to_value(c.status).expect("status serializes");
        out += &format!("{},{},\"{}\"\n", c.name, status.as_str().unwrap_or("?"), c.detail.replace('"', "'"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rule: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect()
    }

    pub fn table(&self) -> String {
        check_table(&self.checks)
    }
}

/// Rule checks plus the engine and strategy checks of the run configuration.
pub fn validate_config(cfg: &RunConfig) -> Result<ValidationReport, BatchError> {
    let sim = cfg.sim_config()?;
    let mut report = validate_rule(&sim.rule, &cfg.validation);
    let engine = sim.validate();
    report.checks.push(CheckResult::new(
        "run_config",
        engine.is_ok(),
        engine.err().map_or_else(|| format!("{} steps, strategy {}", sim.n_steps(), cfg.strategy.kind()), |e| e.to_string()),
    ));
    Ok(report)
}

pub fn validate_rule(rule: &PricingRule, win: &ValidationWindow) -> ValidationReport {
    let grid: Vec<(f64, f64)> = win.times().flat_map(|t| win.points().map(move |x| (t, x))).collect();
    let checks = vec![
        finite_check(rule, &grid),
        w_positive(rule, &grid),
        h_increasing(rule, win),
        pde_check(rule, &grid),
        onto_check(rule),
        g_below_check(rule, win),
    ];
    ValidationReport { rule: rule.name.clone(), checks }
}

fn finite_check(rule: &PricingRule, grid: &[(f64, f64)]) -> CheckResult {
    for &(t, x) in grid {
        let vals = [
            ("H", rule.h.eval(t, x)),
            ("w", rule.w.eval(t, x)),
            ("c", rule.c.eval(t, x)),
            ("g", rule.g.eval(t, x)),
            ("j", rule.j.eval(t, x, 1.0)),
        ];
        if let Some((name, v)) = vals.iter().find(|(_, v)| !v.is_finite()) {
            return CheckResult::new("finite", false, format!("{name}({t}, {x}) = {v}"));
        }
    }
    CheckResult::new("finite", true, format!("{} grid points", grid.len()))
}

fn w_positive(rule: &PricingRule, grid: &[(f64, f64)]) -> CheckResult {
    let (t, x, w) = grid
        .iter()
        .map(|&(t, x)| (t, x, rule.w.eval(t, x)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("grid is non-empty");
    CheckResult::new("w_positive", w > 0.0, format!("min w = {w} at ({t}, {x})"))
}

fn h_increasing(rule: &PricingRule, win: &ValidationWindow) -> CheckResult {
    let xs: Vec<f64> = win.points().collect();
    for t in win.times() {
        for p in xs.windows(2) {
            let (a, b) = (rule.h.eval(t, p[0]), rule.h.eval(t, p[1]));
            if b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
                return CheckResult::new(
                    "h_increasing",
                    false,
                    format!("H({t}, {}) = {a} >= H({t}, {}) = {b}", p[0], p[1]),
                );
            }
        }
    }
    CheckResult::new("h_increasing", true, "strictly increasing on every time slice")
}

fn pde_check(rule: &PricingRule, grid: &[(f64, f64)]) -> CheckResult {
    let mut worst = (0.0f64, "", 0.0, 0.0);
    for &(t, x) in grid {
        let w = rule.w.eval(t, x);
        let w2 = w * w;
        let (rw, rh) = pde_residuals(rule, t, x);
        let scale_w = 1.0 + rule.w.d_t(t, x).abs() + (0.5 * w2 * rule.w.d_xx(t, x)).abs() + (w2 * rule.g.eval(t, x)).abs();
        let scale_h = 1.0 + rule.h.d_t(t, x).abs() + (0.5 * w2 * rule.h.d_xx(t, x)).abs();
        for (r, name) in [(rw / scale_w, "weighting"), (rh / scale_h, "price")] {
            let r = if r.is_finite() { r.abs() } else { f64::INFINITY };
            if r > worst.0 || (r.is_infinite() && worst.0.is_finite()) {
                worst = (r, name, t, x);
            }
        }
    }
    let (r, name, t, x) = worst;
    let detail = if r > 0.0 {
        format!("max relative residual {r:.3e} ({name} equation at ({t}, {x}))")
    } else {
        "residuals vanish on the grid".into()
    };
    CheckResult::new("pde_residuals", r < PDE_TOL, detail)
}

fn onto_check(rule: &PricingRule) -> CheckResult {
    for t in ONTO_TIMES {
        for y in ONTO_LEVELS {
            if let Err(e) = kw_inv(rule, t, y) {
                return CheckResult::new("kw_onto", false, e.to_string());
            }
        }
    }
    CheckResult::new("kw_onto", true, "K_w(t, .) reaches +-10 and +-1000 at t = 0, 0.5, 1")
}

/// `g` must be bounded below. On the window the minimum is reported; when it
/// sits on the window edge, `g` is followed outward over doubling distances
/// and flagged if the decrease does not die out geometrically.
fn g_below_check(rule: &PricingRule, win: &ValidationWindow) -> CheckResult {
    if rule.g.is_zero() {
        return CheckResult::new("g_bounded_below", true, "g = 0");
    }
    let mut min = (f64::INFINITY, 0.0, 0.0);
    for t in win.times() {
        for x in win.points() {
            let g = rule.g.eval(t, x);
            if g.is_nan() || g == f64::NEG_INFINITY {
                return CheckResult::new("g_bounded_below", false, format!("g({t}, {x}) = {g}"));
            }
            if g < min.0 {
                min = (g, t, x);
            }
        }
    }
    let (g_min, t, x) = min;
    for edge in [win.x_lo, win.x_hi] {
        if x != edge {
            continue;
        }
        let c = 0.5 * (win.x_lo + win.x_hi);
        let probe = |k: i32| rule.g.eval(t, c + (edge - c) * 2f64.powi(k));
        let vals: Vec<f64> = (0..=3).map(probe).collect();
        if vals.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return CheckResult::new("g_bounded_below", false, format!("g is not finite beyond x = {edge}"));
        }
        let drops: Vec<f64> = vals.windows(2).map(|p| p[0] - p[1]).collect();
        let persistent = drops.iter().all(|&d| d > 0.0) && drops.windows(2).all(|d| d[1] >= 0.5 * d[0]);
        if persistent {
            return CheckResult::new(
                "g_bounded_below",
                false,
                format!("g keeps decreasing beyond x = {edge} at t = {t}: {vals:?}"),
            );
        }
    }
    CheckResult::new("g_bounded_below", true, format!("min g = {g_min} at ({t}, {x})"))
}
