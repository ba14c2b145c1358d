use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{simulate_path, wealth_decomposition, wealth_direct, wealth_ibp, PathRecord, SimConfig, WealthBreakdown};
use crate::error::ExperimentError;
use crate::experiments::stats::{mean, McSummary};

/// Paths that could not be completed, counted instead of aborting the run.
#[derive(Debug, Clone, Default)]
pub struct PathBatch<T> {
    /// Results of completed paths in path-index order.
    pub values: Vec<T>,
    pub excluded: usize,
}

/// Runs `f` on paths `0..n_paths` of `cfg` in parallel and returns the
/// results in index order. With `threads = Some(k)` a dedicated pool of `k`
/// workers is used. Path-local failures are counted; a count above 0.1% of
/// the paths fails the run.
pub fn run_paths<T, F>(cfg: &SimConfig, n_paths: usize, threads: Option<usize>, f: F) -> Result<PathBatch<T>, ExperimentError>
where
    T: Send,
    F: Fn(u64, &PathRecord) -> Result<T, ExperimentError> + Sync,
{
    cfg.validate()?;
    let work = || -> Vec<Result<Option<T>, ExperimentError>> {
        (0..n_paths as u64)
            .into_par_iter()
            .map(|i| match simulate_path(cfg, i) {
                Ok(rec) => f(i, &rec).map(Some),
                Err(e) if e.is_path_local() => {
                    log::debug!("path {i} excluded: {e}");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            })
            .collect()
    };
    let results = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| ExperimentError::Invalid(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut batch = PathBatch { values: Vec::with_capacity(n_paths), excluded: 0 };
    for r in results {
        match r? {
            Some(v) => batch.values.push(v),
            None => batch.excluded += 1,
        }
    }
    if batch.excluded * 1000 > n_paths {
        return Err(ExperimentError::TooManyDiverged { excluded: batch.excluded, n_paths });
    }
    Ok(batch)
}

/// Monte Carlo estimate of the insider's expected wealth.
pub fn mc_estimate(cfg: &SimConfig, n_paths: usize, threads: Option<usize>) -> Result<McSummary, ExperimentError> {
    if n_paths < 2 {
        return Err(ExperimentError::InsufficientPoints { needed: 2, got: n_paths });
    }
    let batch = run_paths(cfg, n_paths, threads, |_, rec| Ok(wealth_direct(rec)))?;
    Ok(McSummary::from_samples(&batch.values, batch.excluded))
}

/// Per-path wealth in all three forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathWealth {
    pub direct: f64,
    pub ibp: f64,
    pub breakdown: WealthBreakdown,
    /// `int_0^1 S_t^2 dt` along the path.
    pub price_energy: f64,
}

pub fn path_wealth(cfg: &SimConfig, rec: &PathRecord) -> Result<PathWealth, ExperimentError> {
    let energy: f64 = (0..rec.n_nodes() - 1).map(|k| rec.s[k] * rec.s[k] * rec.step_dt(k)).sum();
    Ok(PathWealth {
        direct: wealth_direct(rec),
        ibp: wealth_ibp(rec),
        breakdown: wealth_decomposition(rec, &cfg.rule)?,
        price_energy: energy,
    })
}

/// Empirical `int S^2 dt` across paths. The admissibility condition asks
/// for a finite mean; a single path dominating the sample is reported as a
/// heavy tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceEnergy {
    pub mean: f64,
    pub max: f64,
    pub heavy_tail: bool,
}

/// Aggregates of a full run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub wealth: McSummary,
    pub wealth_ibp: McSummary,
    pub decomposition_total: McSummary,
    /// Per-term means of the decomposition.
    pub breakdown_means: WealthBreakdown,
    /// RMS over paths of `direct - ibp`.
    pub accounting_rms: f64,
    /// Mean of `direct - total`: discretization error plus the zero-mean noise integral.
    pub decomposition_gap: McSummary,
    /// Mean of `direct - total - noise_integral`: the discretization error alone.
    pub decomposition_residual: McSummary,
    pub price_energy: PriceEnergy,
}

pub fn evaluate(cfg: &SimConfig, n_paths: usize, threads: Option<usize>) -> Result<RunStats, ExperimentError> {
    if n_paths < 2 {
        return Err(ExperimentError::InsufficientPoints { needed: 2, got: n_paths });
    }
    let batch = run_paths(cfg, n_paths, threads, |_, rec| path_wealth(cfg, rec))?;
    Ok(summarize(&batch.values, batch.excluded))
}

pub fn summarize(paths: &[PathWealth], excluded: usize) -> RunStats {
    let col = |f: &dyn Fn(&PathWealth) -> f64| -> Vec<f64> { paths.iter().map(f).collect() };
    let summary = |f: &dyn Fn(&PathWealth) -> f64| McSummary::from_samples(&col(f), excluded);
    let term = |f: &dyn Fn(&WealthBreakdown) -> f64| mean(&col(&|p| f(&p.breakdown)));
    let diff2 = col(&|p| (p.direct - p.ibp) * (p.direct - p.ibp));
    let energy = col(&|p| p.price_energy);
    let e_mean = mean(&energy);
    let e_max = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let heavy_tail = energy.len() > 1 && e_max > 0.5 * e_mean * energy.len() as f64;
    if heavy_tail {
        log::warn!("one path carries over half of the sampled int S^2 dt (max {e_max}, mean {e_mean})");
    }
    RunStats {
        wealth: summary(&|p| p.direct),
        wealth_ibp: summary(&|p| p.ibp),
        decomposition_total: summary(&|p| p.breakdown.total),
        breakdown_means: WealthBreakdown {
            psi0: term(&|b| b.psi0),
            psi1: term(&|b| b.psi1),
            qv_term: term(&|b| b.qv_term),
            c_term: term(&|b| b.c_term),
            g_term: term(&|b| b.g_term),
            jump_sum: term(&|b| b.jump_sum),
            total: term(&|b| b.total),
            noise_integral: term(&|b| b.noise_integral),
        },
        accounting_rms: mean(&diff2).sqrt(),
        decomposition_gap: summary(&|p| p.direct - p.breakdown.total),
        decomposition_residual: summary(&|p| p.direct - p.breakdown.total - p.breakdown.noise_integral),
        price_energy: PriceEnergy { mean: e_mean, max: e_max, heavy_tail },
    }
}
