//! Tuning of discrete PI control loops by multi-objective stochastic
//! multi-parameter divergence optimization (MO-SMDO).
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: discrete-time transfer functions, 2×2 plants and a fixed-step
//!   closed-loop simulator.
//! - [`control`]: PI controller with clamping and conditional integration.
//! - [`objective`]: ISE/IAE/ITAE/MSE metrics, the weighted cost and the
//!   J index relative to a baseline controller.
//! - [`smdo`]: the optimizer itself, usable on any black-box cost.
//! - [`scenario`]: JSON scenario schema and built-in fixtures.
//! - [`tune`]: glue running the optimizer over a scenario's gains.
//!
//! ```
//! use smdo_core::{scenario, tune};
//!
//! let s = scenario::builtin("oracle-first-order").unwrap();
//! let config = smdo_core::OptimizerConfig { max_iterations: 5, ..Default::default() };
//! let outcome = tune::tune(&s, &config).unwrap();
//! assert!(outcome.result.best_cost <= outcome.result.initial_cost);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
mod error;
pub mod objective;
pub mod scenario;
pub mod sim;
pub mod smdo;
pub mod tune;

pub use control::{CiConfig, PiController, PiGains, SaturationLimits};
pub use error::{Error, Result};
pub use objective::{CostSpec, MetricKind, MetricSet, WeightMode};
pub use scenario::{load_scenario, Scenario, ScenarioError};
pub use sim::{Plant, ReferenceProfile, SimulationTrace, TransferFunction};
pub use smdo::{IterationRecord, OptimizerConfig, Outcome, ParameterVector};
