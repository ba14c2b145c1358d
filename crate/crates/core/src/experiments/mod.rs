//! Monte Carlo harness, parameter sweeps, convergence studies and the
//! statistical checks built on them.

mod convergence;
mod mc;
mod rationality;
pub mod stats;
mod sweep;

pub use convergence::{convergence_study, ConvergenceReport, ConvergenceRow};
pub use mc::{evaluate, mc_estimate, path_wealth, run_paths, summarize, PathBatch, PathWealth, PriceEnergy, RunStats};
pub use rationality::{rationality_test, RationalityReport, TimeCheck, BINS, TEST_TIMES};
pub use stats::{McSummary, TrendFit};
pub use sweep::{point_seed, sweep, SweepParam, SweepResult, Verdict};
