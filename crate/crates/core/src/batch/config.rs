use serde::{Deserialize, Serialize};

use crate::batch::expr::Expr;
use crate::engine::SimConfig;
use crate::error::BatchError;
use crate::market::catalog::{by_name, penalized, CATALOG_NAMES};
use crate::market::{JumpPenalty, PricingRule, SignalModel, Z0Law};
use crate::strategies::StrategyConfig;

/// A pricing rule: a catalog name, a catalog rule with constant penalties,
/// or an inline descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Name(String),
    Catalog(CatalogRule),
    Inline(InlineRule),
}

/// Catalog rule with `c = c0` and `j(t, x, kappa) = lambda * kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRule {
    pub catalog: String,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub lambda: f64,
}

/// `j(t, x, kappa) = lambda * kappa + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub lambda: f64,
    #[serde(default)]
    pub shift: f64,
}

/// Rule given by closed-form expressions. Without `g`, the value solving the
/// weighting PDE for `w` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineRule {
    pub h: Expr,
    pub w: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Expr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<JumpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Expr>,
}

impl RuleSpec {
    pub fn build(&self) -> Result<PricingRule, BatchError> {
        let catalog = |name: &str| {
            by_name(name).ok_or_else(|| {
                BatchError::Schema(format!("unknown rule '{name}' (catalog: {})", CATALOG_NAMES.join(", ")))
            })
        };
        match self {
            RuleSpec::Name(name) => catalog(name),
            RuleSpec::Catalog(c) => {
                if !(c.c0.is_finite() && c.lambda.is_finite()) {
                    return Err(BatchError::Schema("penalties must be finite".into()));
                }
                Ok(penalized(catalog(&c.catalog)?, c.c0, c.lambda))
            }
            RuleSpec::Inline(r) => r.build(),
        }
    }
}

impl InlineRule {
    pub fn build(&self) -> Result<PricingRule, BatchError> {
        let exprs = [Some(&self.h), Some(&self.w), self.c.as_ref(), self.g.as_ref()];
        for e in exprs.into_iter().flatten() {
            e.check().map_err(BatchError::Schema)?;
        }
        let mut rule = PricingRule::new("inline", self.h.to_func(), self.w.to_func());
        if let Some(c) = &self.c {
            rule = rule.with_c(c.to_func());
        }
        if let Some(j) = self.j {
            if !(j.lambda.is_finite() && j.shift.is_finite()) {
                return Err(BatchError::Schema("jump penalty must be finite".into()));
            }
            rule = rule.with_j(JumpPenalty::linear(j.lambda, j.shift));
        }
        match (&self.g, self.w.as_constant()) {
            (Some(g), _) => rule = rule.with_g(g.to_func()),
            (None, Some(_)) => {}
            (None, None) => rule = rule.with_derived_g(),
        }
        if let Some(w0) = self.w.as_constant() {
            if w0 > 0.0 {
                rule = rule.with_closed_kw(move |_, x| x / w0, move |_, y| y * w0);
            }
        }
        Ok(rule)
    }
}

/// Grid of the admissibility checks: `n_t` times on `[0, 1]` and `n_x`
/// points on `[x_lo, x_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationWindow {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_t: usize,
    pub n_x: usize,
}

impl Default for ValidationWindow {
    fn default() -> Self {
        Self { x_lo: -5.0, x_hi: 5.0, n_t: 11, n_x: 41 }
    }
}

impl ValidationWindow {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_t.max(2);
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n_x.max(2);
        (0..n).map(move |i| self.x_lo + (self.x_hi - self.x_lo) * i as f64 / (n - 1) as f64)
    }
}

/// A complete run document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rule: RuleSpec,
    pub signal: SignalModel,
    pub strategy: StrategyConfig,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Output directory; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Noise resolution finer than `dt`, summed onto the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_dt: Option<f64>,
    #[serde(default)]
    pub validation: ValidationWindow,
}

impl RunConfig {
    /// Parses and schema-checks a JSON document.
    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| BatchError::Schema(e.to_string()))?;
        check_numbers(&value, "")?;
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| BatchError::Schema(e.to_string()))?;
        cfg.check_fields()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }

    fn check_fields(&self) -> Result<(), BatchError> {
        let bad = |m: String| Err(BatchError::Schema(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n_paths < 2 {
            return bad(format!("n_paths must be at least 2, got {}", self.n_paths));
        }
        let v = &self.validation;
        if !(v.x_lo.is_finite() && v.x_hi.is_finite() && v.x_lo < v.x_hi) {
            return bad("validation window needs x_lo < x_hi".into());
        }
        if v.n_t < 2 || v.n_x < 2 {
            return bad("validation grid needs at least 2 points per axis".into());
        }
        Ok(())
    }

    /// Engine configuration; the initial signal is drawn when its law is not a point.
    pub fn sim_config(&self) -> Result<SimConfig, BatchError> {
        self.check_fields()?;
        let rule = self.rule.build()?;
        let draw = !matches!(self.signal.z0_law, Z0Law::Point);
        let mut cfg = SimConfig::new(rule, self.signal, self.strategy.clone(), self.dt, self.seed).with_draw_z0(draw);
        if let Some(n) = self.noise_dt {
            cfg = cfg.with_noise_dt(n);
        }
        Ok(cfg)
    }
}

/// Rejects non-finite numbers anywhere in the document.
fn check_numbers(v: &serde_json::Value, path: &str) -> Result<(), BatchError> {
    match v {
        serde_json::Value::Number(n) if n.as_f64().is_none_or(|f| !f.is_finite()) => {
            Err(BatchError::Schema(format!("non-finite number at '{path}'")))
        }
        serde_json::Value::Array(items) => {
            items.iter().enumerate().try_for_each(|(i, x)| check_numbers(x, &format!("{path}[{i}]")))
        }
        serde_json::Value::Object(map) => map.iter().try_for_each(|(k, x)| check_numbers(x, &format!("{path}.{k}"))),
        _ => Ok(()),
    }
}
