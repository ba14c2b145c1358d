//! Deterministic numerical kernels shared by the market, the strategies and
//! the wealth accounting. Everything here is pure given an immutable rule.

mod func;
mod kernels;
pub mod quad;
pub mod root;

pub use func::{Eval2, Func2, FD_SCALE_MAX, FD_SCALE_X, FD_STEP_T};
pub use kernels::{
    g_argmin, g_cost, g_primitive, kw, kw_inv, kw_time_part, pde_residuals, psi, psi_increment,
    psi_pde_residual, psi_time_part, reduce_to_identity, xi, GCost,
};
pub use quad::{QuadratureMethod, QuadratureSpec};
pub use root::ROOT_TOL;
