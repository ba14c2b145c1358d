//! Run documents, admissibility reports and run summaries: the pieces of a
//! batch run that do not touch the filesystem.

mod config;
mod expr;
mod run;
mod validate;

pub use config::{CatalogRule, InlineRule, JumpSpec, RuleSpec, RunConfig, ValidationWindow};
pub use expr::Expr;
pub use run::{run, run_sweep, RunSummary, SweepSummary, JUMP_BOUND_TOL};
pub use validate::{
    check_table, validate_config, validate_rule, CheckResult, Status, ValidationReport, ONTO_LEVELS, ONTO_TIMES,
    PDE_TOL,
};
