//! Order-independent reductions and the statistical tests used by the harness.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::ExperimentError;

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    /// Paths requested.
    pub n_paths: usize,
    pub mean: f64,
    /// Sample standard deviation over the square root of the paths used.
    pub stderr: f64,
    pub ci95: [f64; 2],
    pub excluded: usize,
}

impl McSummary {
    pub fn from_samples(xs: &[f64], excluded: usize) -> Self {
        let used = xs.len();
        let mean = mean(xs);
        let stderr = if used > 1 { (variance(xs) / used as f64).sqrt() } else { 0.0 };
        Self { n_paths: used + excluded, mean, stderr, ci95: [mean - 1.96 * stderr, mean + 1.96 * stderr], excluded }
    }

    /// `mean <= bound + k * stderr`.
    pub fn at_most(&self, bound: f64, k: f64) -> bool {
        self.mean <= bound + k * self.stderr
    }
}

/// Result of a one-sample Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail `P(K > lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        p += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// One-sample KS test against `cdf`, with Stephens' finite-sample scaling.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    let sq = nf.sqrt();
    KsResult { n, statistic: d, p_value: kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d) }
}

/// Least-squares polynomial trend through independent point estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub degree: usize,
    /// Coefficients from the constant term up.
    pub coefficients: Vec<f64>,
    /// Standard errors propagated from the point standard errors.
    pub stderrs: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `sum (residual / point stderr)^2` over points with positive stderr.
    pub chi2: f64,
}

impl TrendFit {
    pub fn leading(&self) -> (f64, f64) {
        (self.coefficients[self.degree], self.stderrs[self.degree])
    }
}

/// Ordinary least squares with covariance `A diag(se^2) A^T`, `A = (X^T X)^-1 X^T`.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], ses: &[f64], degree: usize) -> Result<TrendFit, ExperimentError> {
    let n = xs.len();
    if n < degree + 1 {
        return Err(ExperimentError::InsufficientPoints { needed: degree + 1, got: n });
    }
    let design = DMatrix::from_fn(n, degree + 1, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let xtx = design.transpose() * &design;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| ExperimentError::Invalid("trend design matrix is singular".into()))?;
    let a = inv * design.transpose();
    let beta = &a * &y;
    let cov = &a * DMatrix::from_diagonal(&DVector::from_iterator(n, ses.iter().map(|s| s * s))) * a.transpose();
    let fitted = &design * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| ys[i] - fitted[i]).collect();
    let chi2 = residuals
        .iter()
        .zip(ses)
        .filter(|(_, s)| **s > 0.0)
        .map(|(r, s)| (r / s) * (r / s))
        .sum();
    Ok(TrendFit {
        degree,
        coefficients: beta.iter().copied().collect(),
        stderrs: (0..=degree).map(|j| cov[(j, j)].max(0.0).sqrt()).collect(),
        residuals,
        chi2,
    })
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
