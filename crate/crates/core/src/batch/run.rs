use serde::{Deserialize, Serialize};

use crate::batch::config::RunConfig;
use crate::batch::validate::{validate_config, CheckResult, Status};
use crate::engine::{check_jump_bounds, SimConfig};
use crate::error::{BatchError, ExperimentError};
use crate::experiments::{path_wealth, run_paths, summarize, sweep, McSummary, RunStats, SweepParam, SweepResult};

/// Tolerance of the jump-bound inequalities.
pub const JUMP_BOUND_TOL: f64 = 1e-6;

/// Machine-readable result of a run. Contains nothing that depends on the
/// worker count or the wall clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub rule: String,
    pub stats: RunStats,
    /// `mean(direct - psi0)`, the slack of the upper bound.
    pub excess_over_psi0: McSummary,
    pub checks: Vec<CheckResult>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BatchError> {
        serde_json::from_str(text).map_err(|e| BatchError::Schema(e.to_string()))
    }

    /// Per-term means as a comma-separated table with header `term,mean`.
    pub fn terms_table(&self) -> String {
        let s = &self.stats;
        let b = &s.breakdown_means;
        let rows = [
            ("wealth_direct", s.wealth.mean),
            ("wealth_ibp", s.wealth_ibp.mean),
            ("psi0", b.psi0),
            ("psi1", b.psi1),
            ("qv_term", b.qv_term),
            ("c_term", b.c_term),
            ("g_term", b.g_term),
            ("jump_sum", b.jump_sum),
            ("decomposition_total", b.total),
            ("noise_integral", b.noise_integral),
        ];
        let mut out = String::from("term,mean\n");
        for (name, v) in rows {
            out += &format!("{name},{v}\n");
        }
        out
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect()
    }
}

struct PathOutcome {
    wealth: crate::experiments::PathWealth,
    excess: f64,
    jumps: usize,
    violations: usize,
}

/// Validates the configuration, simulates every path and assembles the summary.
pub fn run(cfg: &RunConfig, threads: Option<usize>) -> Result<RunSummary, BatchError> {
    let report = validate_config(cfg)?;
    if !report.passed() {
        return Err(BatchError::Validation(report.failures().join(", ")));
    }
    let sim = cfg.sim_config()?;
    let batch = run_paths(&sim, cfg.n_paths, threads, |_, rec| {
        let wealth = path_wealth(&sim, rec)?;
        let bounds = check_jump_bounds(rec, &sim.rule).map_err(ExperimentError::from)?;
        Ok(PathOutcome {
            excess: wealth.direct - wealth.breakdown.psi0,
            wealth,
            jumps: bounds.len(),
            violations: bounds.iter().filter(|b| !b.holds(JUMP_BOUND_TOL)).count(),
        })
    })?;
    let wealth: Vec<_> = batch.values.iter().map(|p| p.wealth).collect();
    let stats = summarize(&wealth, batch.excluded);
    let excess: Vec<f64> = batch.values.iter().map(|p| p.excess).collect();
    let excess = McSummary::from_samples(&excess, batch.excluded);
    let jumps: usize = batch.values.iter().map(|p| p.jumps).sum();
    let violations: usize = batch.values.iter().map(|p| p.violations).sum();
    let checks = invariant_checks(&sim, cfg.n_paths, &stats, &excess, jumps, violations);
    Ok(RunSummary { config: cfg.clone(), rule: sim.rule.name.clone(), stats, excess_over_psi0: excess, checks })
}

fn invariant_checks(
    sim: &SimConfig,
    n_paths: usize,
    stats: &RunStats,
    excess: &McSummary,
    jumps: usize,
    violations: usize,
) -> Vec<CheckResult> {
    let excluded = stats.wealth.excluded;
    let mut out = vec![CheckResult::new(
        "exclusions",
        excluded * 1000 <= n_paths,
        format!("{excluded} of {n_paths} paths excluded"),
    )];
    let rule = &sim.rule;
    let continuous = !matches!(sim.strategy, crate::strategies::StrategyConfig::ExploitJ { .. })
        && !matches!(&sim.strategy, crate::strategies::StrategyConfig::Scripted { jumps, .. } if !jumps.is_empty());
    out.push(if rule.is_unpenalized() && rule.g.is_zero() && continuous {
        CheckResult::new(
            "upper_bound",
            excess.at_most(0.0, 3.0),
            format!("mean(wealth - psi0) = {:.6} +- {:.6}", excess.mean, excess.stderr),
        )
    } else {
        CheckResult::with_status("upper_bound", Status::Skip, "applies to continuous strategies when c = j = g = 0")
    });
    out.push(if jumps > 0 {
        CheckResult::new("jump_bounds", violations == 0, format!("{violations} of {jumps} jumps violate a bound"))
    } else {
        CheckResult::with_status("jump_bounds", Status::Skip, "no jumps")
    });
    let e = &stats.price_energy;
    out.push(CheckResult::with_status(
        "price_energy",
        if e.heavy_tail { Status::Warn } else { Status::Pass },
        format!("mean int S^2 dt = {:.6}, max = {:.6}", e.mean, e.max),
    ));
    out
}

/// Result of a parameter sweep with the configuration it ran from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: RunConfig,
    pub result: SweepResult,
}

impl SweepSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// One line naming the fitted coefficient and the verdict.
    pub fn verdict_line(&self) -> String {
        let (coef, se) = self.result.trend.leading();
        let what = if self.result.trend.degree == 2 { "quadratic" } else { "linear" };
        format!(
            "{}: {what} coefficient {coef:.4} +- {se:.4} -> {} (growth over the sampled values, not a proof of divergence)",
            self.result.param, self.result.verdict
        )
    }
}

pub fn run_sweep(
    cfg: &RunConfig,
    param: SweepParam,
    values: &[f64],
    threads: Option<usize>,
) -> Result<SweepSummary, BatchError> {
    let report = validate_config(cfg)?;
    if !report.passed() {
        return Err(BatchError::Validation(report.failures().join(", ")));
    }
    let sim = cfg.sim_config()?;
    let result = sweep(&sim, param, values, cfg.n_paths, threads)?;
    Ok(SweepSummary { config: cfg.clone(), result })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(strategy: &str, rule: &str) -> RunConfig {
        RunConfig::from_json(&format!(
            r#"{{"rule": {rule}, "signal": {{"z": 1.0, "payoff": {{"kind": "identity"}}}},
                "strategy": {strategy}, "dt": 0.01, "n_paths": 200, "seed": 3}}"#
        ))
        .unwrap()
    }

    #[test]
    fn bridge_run_checks() {
        let s = run(&cfg(r#"{"kind": "bridge"}"#, r#""back-identity""#), None).unwrap();
        assert!(s.failed_checks().is_empty(), "{:?}", s.checks);
        assert_eq!(s.checks.iter().find(|c| c.name == "jump_bounds").unwrap().status, Status::Skip);
        assert!((s.stats.wealth.mean - 1.0).abs() < 0.1);
        assert!(s.terms_table().starts_with("term,mean\nwealth_direct,"));
        assert_eq!(RunSummary::from_json(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn jump_run_checks_bounds() {
        let st = r#"{"kind": "exploit_j", "t1": 0.2, "t2": 0.6, "x1": 0.0, "x2": 1.0, "n_jumps": 2, "kappa": 1.0, "epsilon": 0.25}"#;
        let mut c = cfg(st, r#"{"catalog": "back-identity", "lambda": 0.5}"#);
        c.dt = 5e-4;
        c.n_paths = 20;
        let s = run(&c, None).unwrap();
        let jb = s.checks.iter().find(|c| c.name == "jump_bounds").unwrap();
        assert_eq!(jb.status, Status::Pass, "{}", jb.detail);
        assert_eq!(s.checks.iter().find(|c| c.name == "upper_bound").unwrap().status, Status::Skip);
    }

    #[test]
    fn invalid_rule_blocks_the_run() {
        let rule = r#"{"h": {"kind": "poly", "coeffs": [[0, 0], [1, 0]]}, "w": {"kind": "exp", "scale": 1, "alpha": 1}}"#;
        assert!(matches!(run(&cfg(r#"{"kind": "zero"}"#, rule), None), Err(BatchError::Validation(_))));
    }
}
