//! Pricing rules, signal models and the market maker's state-update law.

pub mod catalog;
mod rule;
mod signal;
mod state;

pub use rule::{ClosedForms, JumpFn, JumpPenalty, PricingRule};
pub use signal::{gauss_hermite, mqv_profile, Payoff, SignalDynamics, SignalModel, Z0Law};
pub use state::{apply_jump, price, step_continuous, MarketState};
