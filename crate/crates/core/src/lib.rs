//! Design analytics and simulation for batched arm elimination (BAE) in
//! fixed-budget best-arm identification.
//!
//! - [`design`]: Gaussian instances and BAE batch weights, including the
//!   completely randomized trial, successive rejects and two-batch designs.
//! - [`exponent`]: large-deviation exponents of BAE under Gaussian noise and
//!   the weight-only certificate for beating the completely randomized trial.
//! - [`simulate`]: the sequential elimination engine and a reproducible
//!   parallel Monte Carlo harness.
//! - [`calibrate`]: zero-inflated lognormal outcome models from data or
//!   summary statistics.
//! - [`cli`]: the `baelab` command-line front end.

pub mod calibrate;
pub mod cli;
pub mod design;
pub mod exponent;
pub mod simulate;

pub use design::{BatchWeights, DesignSpec, Instance};
pub use exponent::ExponentReport;
pub use simulate::{OutcomeModel, SimReport};
