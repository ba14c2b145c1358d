//! Command-line front-end: validate a run document, run it, sweep one of its
//! parameters, or print a stored result.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kyleback::batch::{self, check_table, RunConfig, RunSummary, SweepSummary};
use kyleback::engine::{simulate_path, write_trace};
use kyleback::experiments::SweepParam;
use kyleback::{BatchError, ExperimentError};

/// Monte Carlo experiments for generalized Kyle-Back insider trading models.
#[derive(Debug, Parser)]
#[command(name = "kyleback", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a run document and its pricing rule on the validation grid.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate all paths and write the summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed of the document.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        threads: Option<usize>,
        /// Write per-path traces of the first N paths.
        #[arg(long, value_name = "N")]
        trace: Option<u64>,
        /// Output directory; overrides the document.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate mean wealth over a list of parameter values and fit a trend.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of b, n_jumps, z, dt.
        #[arg(long)]
        param: String,
        /// Comma-separated values, at least three.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the tables of a stored run or sweep.
    Report {
        /// Directory holding summary.json or sweep.json.
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_USAGE: u8 = 3;

const DEFAULT_OUT: &str = "kyleback-out";

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<BatchError> for Failure {
    fn from(e: BatchError) -> Self {
        let code = match &e {
            BatchError::Schema(_) | BatchError::Validation(_) => EXIT_VALIDATION,
            BatchError::Experiment(ExperimentError::InsufficientPoints { .. } | ExperimentError::Invalid(_)) => {
                EXIT_USAGE
            }
            BatchError::Experiment(_) => EXIT_RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Validate { config } => validate(&config),
        Command::Run { config, seed, threads, trace, out } => run(&config, seed, threads, trace, out),
        Command::Sweep { config, param, values, seed, threads, out } => sweep(&config, &param, &values, seed, threads, out),
        Command::Report { out } => report(&out),
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    cli.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", path.display())))
}

fn validate(config: &Path) -> Result<u8, Failure> {
    let cfg = load(config, None)?;
    let report = batch::validate_config(&cfg)?;
    print!("{}", report.table());
    if report.passed() {
        println!("rule {}: all checks pass", report.rule);
        Ok(0)
    } else {
        println!("rule {}: failed {}", report.rule, report.failures().join(", "));
        Ok(EXIT_VALIDATION)
    }
}

fn run(config: &Path, seed: Option<u64>, threads: Option<usize>, trace: Option<u64>, out: Option<PathBuf>) -> Result<u8, Failure> {
    let cfg = load(config, seed)?;
    let report = batch::validate_config(&cfg)?;
    if !report.passed() {
        print!("{}", report.table());
        return Err(BatchError::Validation(report.failures().join(", ")).into());
    }
    let summary = batch::run(&cfg, threads)?;
    let dir = output::prepare(&out_dir(out, &cfg)).map_err(|e| Failure::runtime(e.to_string()))?;
    write(&dir, output::SUMMARY, &summary.to_json())?;
    write(&dir, "terms.csv", &summary.terms_table())?;
    write(&dir, "checks.csv", &check_table(&summary.checks))?;
    if let Some(n) = trace {
        write_traces(&cfg, &dir.join("traces"), n)?;
    }
    print_run(&summary);
    println!("wrote {}", dir.display());
    Ok(if summary.failed_checks().is_empty() { 0 } else { EXIT_VALIDATION })
}

fn write_traces(cfg: &RunConfig, dir: &Path, n: u64) -> Result<(), Failure> {
    let sim = cfg.sim_config()?;
    fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("cannot create {}: {e}", dir.display())))?;
    for i in 0..n.min(cfg.n_paths as u64) {
        match simulate_path(&sim, i) {
            Ok(rec) => write_trace(&rec, dir, i).map_err(|e| Failure::runtime(format!("cannot write trace {i}: {e}")))?,
            Err(e) => log::warn!("path {i} has no trace: {e}"),
        }
    }
    Ok(())
}

fn print_run(s: &RunSummary) {
    let w = &s.stats.wealth;
    println!("rule {}, strategy {}, {} paths ({} excluded)", s.rule, s.config.strategy.kind(), w.n_paths, w.excluded);
    println!("mean wealth {:.6} +- {:.6} (95% CI [{:.6}, {:.6}])", w.mean, w.stderr, w.ci95[0], w.ci95[1]);
    print!("{}", s.terms_table());
    print!("{}", check_table(&s.checks));
}

fn sweep(
    config: &Path,
    param: &str,
    values: &[f64],
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let param: SweepParam = param.parse().map_err(|e: ExperimentError| Failure::usage(e.to_string()))?;
    if values.len() < 3 {
        return Err(Failure::usage(format!("a sweep needs at least 3 values, got {}", values.len())));
    }
    let cfg = load(config, seed)?;
    let summary = batch::run_sweep(&cfg, param, values, threads)?;
    let dir = output::prepare(&out_dir(out, &cfg)).map_err(|e| Failure::runtime(e.to_string()))?;
    write(&dir, output::SWEEP, &summary.to_json())?;
    write(&dir, "sweep.csv", &summary.result.table())?;
    print_sweep(&summary);
    println!("wrote {}", dir.display());
    Ok(0)
}

fn print_sweep(s: &SweepSummary) {
    print!("{}", s.result.table());
    println!("{}", s.verdict_line());
}

fn report(dir: &Path) -> Result<u8, Failure> {
    let read = |name: &str| fs::read_to_string(dir.join(name)).ok();
    if let Some(text) = read(output::SUMMARY) {
        print_run(&RunSummary::from_json(&text)?);
        return Ok(0);
    }
    if let Some(text) = read(output::SWEEP) {
        let s: SweepSummary = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("bad sweep file: {e}")))?;
        print_sweep(&s);
        return Ok(0);
    }
    Err(Failure::usage(format!("no {} or {} in {}", output::SUMMARY, output::SWEEP, dir.display())))
}
