//! Sharp constants for subordinate conformal martingales.
//!
//! The constants are governed by the smallest zero `z_p` of the bounded
//! Laguerre function `L_p`, the solution of `s y'' + (1 - s) y' + p y = 0`
//! with `L_p(0) = 1`. On top of that zero the crate builds the one-variable
//! Bellman majorant `g`, its homogeneous lift `U(x, y) = (x + y)^p g(y / (x + y))`,
//! grid certification of the quadratic-form conditions on `U`, Monte Carlo
//! checks on simulated martingale pairs, and the resulting norm bounds for the
//! Beurling-Ahlfors transform.

// `!(a > b)` comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellman;
pub mod bounds;
mod error;
pub mod format;
pub mod laguerre;
pub mod quadrature;
pub mod sim;
pub mod verify;

pub use bellman::{
    dual_constant_ratio, sharp_constants, sharpness_witness, BellmanProfile, GValues, Obstacle,
    OperatorValues, SharpConstants, Side, UPartials,
};
pub use bounds::{ba_bound_chain, ba_bound_theorem, comparison_table, tau_p, tau_upper, BoundTableRow};
pub use error::{Error, Result};
pub use laguerre::{
    bessel_j0, bessel_j0_first_zero, constant_q, laguerre_eval, smallest_zero, LaguerreEval, Order,
    ZeroResult,
};
pub use sim::{simulate, SimConfig, SimResult, Strategy};
pub use verify::{Grid, VerificationReport};

/// Default relative tolerance for series evaluation.
pub const DEFAULT_REL_TOL: f64 = 1e-12;
/// Default absolute tolerance for the zero search.
pub const DEFAULT_ZERO_TOL: f64 = 1e-13;
