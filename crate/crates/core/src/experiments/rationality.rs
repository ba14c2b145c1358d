use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::engine::{PathRecord, SimConfig};
use crate::error::ExperimentError;
use crate::experiments::mc::run_paths;
use crate::experiments::stats::{ks_test, mean, variance, KsResult};
use crate::market::price;

/// Times at which demand and prices are tested.
pub const TEST_TIMES: [f64; 3] = [0.25, 0.5, 0.75];
/// Equal-count bins of the conditional-payoff regression.
pub const BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCheck {
    pub t: f64,
    /// Demand `Y_t` against `Normal(0, t)`.
    pub ks: KsResult,
    /// Largest `|mean(f(Z_1) - H(t, X_t))|` over bins of `X_t`, in units of
    /// the bin's standard error.
    pub max_bin_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityReport {
    pub n_paths: usize,
    pub excluded: usize,
    pub checks: Vec<TimeCheck>,
}

impl RationalityReport {
    /// KS p-values above `alpha` and bin deviations below `k` standard errors.
    pub fn passes(&self, alpha: f64, k: f64) -> bool {
        self.checks.iter().all(|c| c.ks.p_value > alpha && c.max_bin_deviation < k)
    }
}

fn node_at(rec: &PathRecord, t: f64) -> usize {
    rec.t.iter().position(|&s| s >= t - 1e-12).unwrap_or(rec.t.len() - 1)
}

/// Checks that under `cfg` (normally the bridge with a randomized signal)
/// demand is a Brownian motion and the price is the conditional payoff.
pub fn rationality_test(cfg: &SimConfig, n_paths: usize, threads: Option<usize>) -> Result<RationalityReport, ExperimentError> {
    if n_paths < 2 * BINS {
        return Err(ExperimentError::InsufficientPoints { needed: 2 * BINS, got: n_paths });
    }
    let batch = run_paths(cfg, n_paths, threads, |_, rec| {
        Ok(TEST_TIMES.map(|t| {
            let k = node_at(rec, t);
            (rec.y[k], rec.x[k], rec.t[k])
        })
        .into_iter()
        .chain(std::iter::once((rec.payoff, 0.0, 0.0)))
        .collect::<Vec<_>>())
    })?;
    let mut checks = Vec::new();
    for (i, &t) in TEST_TIMES.iter().enumerate() {
        let normal = Normal::new(0.0, t.sqrt()).map_err(|e| ExperimentError::Invalid(e.to_string()))?;
        let ys: Vec<f64> = batch.values.iter().map(|v| v[i].0).collect();
        let ks = ks_test(&ys, |y| normal.cdf(y));

        let mut pairs: Vec<(f64, f64)> = batch
            .values
            .iter()
            .map(|v| {
                let (_, x, tk) = v[i];
                (x, v[TEST_TIMES.len()].0 - price(&cfg.rule, tk, x))
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pairs.len();
        let mut worst: f64 = 0.0;
        for b in 0..BINS {
            let bin: Vec<f64> = pairs[b * n / BINS..(b + 1) * n / BINS].iter().map(|p| p.1).collect();
            let se = (variance(&bin) / bin.len() as f64).sqrt();
            if se > 0.0 {
                worst = worst.max(mean(&bin).abs() / se);
            }
        }
        checks.push(TimeCheck { t, ks, max_bin_deviation: worst });
    }
    Ok(RationalityReport { n_paths, excluded: batch.excluded, checks })
}
