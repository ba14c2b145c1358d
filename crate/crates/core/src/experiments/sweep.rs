use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::SimConfig;
use crate::error::ExperimentError;
use crate::experiments::mc::mc_estimate;
use crate::experiments::stats::{fit_polynomial, McSummary, TrendFit};
use crate::strategies::StrategyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Brownian loading of the c-exploit; fitted with a quadratic.
    B,
    /// Number of jumps of the j-exploit; fitted with a line.
    NJumps,
    /// Insider signal; fitted with a line.
    Z,
    /// Grid step; fitted with a line.
    Dt,
}

impl FromStr for SweepParam {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "b" => Ok(SweepParam::B),
            "n_jumps" => Ok(SweepParam::NJumps),
            "z" => Ok(SweepParam::Z),
            "dt" => Ok(SweepParam::Dt),
            _ => Err(ExperimentError::Invalid(format!("unknown sweep parameter '{s}' (expected b, n_jumps, z or dt)"))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::B => "b",
            SweepParam::NJumps => "n_jumps",
            SweepParam::Z => "z",
            SweepParam::Dt => "dt",
        })
    }
}

impl SweepParam {
    pub fn fit_degree(&self) -> usize {
        match self {
            SweepParam::B => 2,
            _ => 1,
        }
    }

    /// Copy of `cfg` with the parameter set to `value`.
    pub fn apply(&self, cfg: &SimConfig, value: f64) -> Result<SimConfig, ExperimentError> {
        let mut out = cfg.clone();
        match (self, &mut out.strategy) {
            (SweepParam::B, StrategyConfig::ExploitC { b, .. }) => *b = value,
            (SweepParam::NJumps, StrategyConfig::ExploitJ { n_jumps, .. }) => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(ExperimentError::Invalid(format!("n_jumps must be a positive integer, got {value}")));
                }
                *n_jumps = value as u32;
            }
            (SweepParam::Z, _) => out.signal.z = value,
            (SweepParam::Dt, _) => out.dt = value,
            (p, s) => {
                return Err(ExperimentError::Invalid(format!("parameter {p} does not apply to strategy {}", s.kind())))
            }
        }
        Ok(out)
    }
}

/// Verdict on the leading trend coefficient at three standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Verdict {
    Grows,
    FlatOrDecreasing,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Grows => "GROWS",
            Verdict::FlatOrDecreasing => "FLAT-OR-DECREASING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub points: Vec<McSummary>,
    pub trend: TrendFit,
    pub verdict: Verdict,
    /// Leading coefficient plus three standard errors is at most zero.
    pub decreasing: bool,
}

impl SweepResult {
    /// Comma-separated table with a fixed header.
    pub fn table(&self) -> String {
        let mut out = format!("{},n_paths,mean,stderr,ci95_lo,ci95_hi,excluded\n", self.param);
        for (v, p) in self.values.iter().zip(&self.points) {
            out += &format!("{v},{},{},{},{},{},{}\n", p.n_paths, p.mean, p.stderr, p.ci95[0], p.ci95[1], p.excluded);
        }
        out
    }
}

/// Seed for sweep point `i`, so that point estimates are independent.
pub fn point_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Monte Carlo estimate at each value and a least-squares trend. A finite
/// sweep can certify growth at the sampled values, not divergence.
pub fn sweep(
    cfg: &SimConfig,
    param: SweepParam,
    values: &[f64],
    n_paths: usize,
    threads: Option<usize>,
) -> Result<SweepResult, ExperimentError> {
    if values.len() < 3 {
        return Err(ExperimentError::InsufficientPoints { needed: 3, got: values.len() });
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExperimentError::Invalid("sweep values must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let point = param.apply(cfg, v)?.with_seed(point_seed(cfg.seed, i));
        points.push(mc_estimate(&point, n_paths, threads)?);
    }
    let means: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let ses: Vec<f64> = points.iter().map(|p| p.stderr).collect();
    let trend = fit_polynomial(values, &means, &ses, param.fit_degree())?;
    let (coef, se) = trend.leading();
    let verdict = if coef - 3.0 * se > 0.0 { Verdict::Grows } else { Verdict::FlatOrDecreasing };
    Ok(SweepResult { param, values: values.to_vec(), points, trend, verdict, decreasing: coef + 3.0 * se <= 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::catalog::back_identity;
    use crate::market::SignalModel;

    fn cfg() -> SimConfig {
        SimConfig::new(back_identity(), SignalModel::fixed(1.0), StrategyConfig::Zero, 1e-2, 1)
    }

    #[test]
    fn parses_parameters() {
        assert_eq!("b".parse::<SweepParam>().unwrap(), SweepParam::B);
        assert_eq!("n_jumps".parse::<SweepParam>().unwrap().to_string(), "n_jumps");
        assert!("kappa".parse::<SweepParam>().is_err());
    }

    #[test]
    fn needs_three_values() {
        let r = sweep(&cfg(), SweepParam::Z, &[0.0, 1.0], 10, None);
        assert!(matches!(r, Err(ExperimentError::InsufficientPoints { needed: 3, got: 2 })));
    }

    #[test]
    fn loading_only_applies_to_c_exploit() {
        assert!(SweepParam::B.apply(&cfg(), 2.0).is_err());
    }

    #[test]
    fn zero_strategy_sweep_is_flat() {
        let r = sweep(&cfg(), SweepParam::Z, &[-1.0, 0.0, 1.0], 20, None).unwrap();
        assert_eq!(r.verdict, Verdict::FlatOrDecreasing);
        assert_eq!(r.verdict.to_string(), "FLAT-OR-DECREASING");
        assert!(r.table().starts_with("z,n_paths,mean,stderr"));
        assert_eq!(r.table().lines().count(), 4);
    }
}
