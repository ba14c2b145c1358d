//! Monte Carlo simulation of generalized Kyle-Back insider trading models.
//!
//! The crate is organized bottom-up: [`mathcore`] holds the deterministic
//! kernels of a pricing rule, [`market`] the rule catalog and state-update
//! law, [`strategies`] the insider's trading rules, [`engine`] the path
//! simulator with its wealth accounting, [`experiments`] the Monte Carlo
//! harness and statistical tests, and [`batch`] the config-driven runs used
//! by the command-line front-end.

// `!(v > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod market;
pub mod mathcore;
pub mod strategies;

pub use error::{BatchError, EngineError, ExperimentError, MathError, StrategyError};
