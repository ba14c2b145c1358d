use serde::{Deserialize, Serialize};

use crate::engine::SimConfig;
use crate::error::ExperimentError;
use crate::experiments::mc::evaluate;
use crate::experiments::stats::log_log_slope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `|mean - target|` when a closed-form target is known.
    pub bias: Option<f64>,
    /// RMS over paths of `direct - ibp`.
    pub accounting_rms: f64,
    /// `|mean(direct - total - noise_integral)|`.
    pub decomposition_gap: f64,
    /// `mean(direct - total)` and its standard error.
    pub literal_gap: f64,
    pub literal_gap_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted exponent of `accounting_rms ~ dt^order`.
    pub accounting_order: f64,
    pub decomposition_order: f64,
}

impl ConvergenceReport {
    pub fn accounting_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].accounting_rms < w[0].accounting_rms)
    }

    pub fn decomposition_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].decomposition_gap < w[0].decomposition_gap)
    }

    pub fn table(&self) -> String {
        let mut out = String::from("dt,mean,stderr,bias,accounting_rms,decomposition_gap,literal_gap,literal_gap_stderr\n");
        for r in &self.rows {
            let bias = r.bias.map(|b| b.to_string()).unwrap_or_default();
            out += &format!(
                "{},{},{},{},{},{},{},{}\n",
                r.dt, r.mean, r.stderr, bias, r.accounting_rms, r.decomposition_gap, r.literal_gap, r.literal_gap_stderr
            );
        }
        out
    }
}

/// Runs `cfg` at each step in `dts` (decreasing, geometric) on the same seed.
/// Noise is drawn at the finest step so every run sees the same Brownian paths.
pub fn convergence_study(
    cfg: &SimConfig,
    dts: &[f64],
    n_paths: usize,
    target: Option<f64>,
    threads: Option<usize>,
) -> Result<ConvergenceReport, ExperimentError> {
    if dts.len() < 3 {
        return Err(ExperimentError::InsufficientPoints { needed: 3, got: dts.len() });
    }
    let ratio = dts[1] / dts[0];
    if !(ratio < 1.0) || dts.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return Err(ExperimentError::Invalid("dt list must be decreasing and geometric".into()));
    }
    let finest = dts[dts.len() - 1];
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in dts {
        let run = cfg.clone().with_dt(dt).with_noise_dt(finest);
        let stats = evaluate(&run, n_paths, threads)?;
        rows.push(ConvergenceRow {
            dt,
            mean: stats.wealth.mean,
            stderr: stats.wealth.stderr,
            bias: target.map(|a| (stats.wealth.mean - a).abs()),
            accounting_rms: stats.accounting_rms,
            decomposition_gap: stats.decomposition_residual.mean.abs(),
            literal_gap: stats.decomposition_gap.mean,
            literal_gap_stderr: stats.decomposition_gap.stderr,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let acc: Vec<f64> = rows.iter().map(|r| r.accounting_rms).collect();
    let dec: Vec<f64> = rows.iter().map(|r| r.decomposition_gap).collect();
    Ok(ConvergenceReport { accounting_order: log_log_slope(&x, &acc), decomposition_order: log_log_slope(&x, &dec), rows })
}
