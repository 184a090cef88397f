//! Two-task anti-voter dynamics on graphs.
//!
//! Each vertex performs task 1 or task 2. A vertex on task `i` with
//! fraction `f` of neighbors on the other task switches at rate
//! `c_i (eps + (1 - eps)(1 - f))`; isolated vertices switch at rate `c_i`.
//!
//! - [`graph`]: graphs, generators and bipartitions.
//! - [`dynamics`]: tasks, parameters, configurations and switching rates.
//! - [`engine`]: Gillespie and graphical-representation simulators,
//!   observables, hitting times and influence sets.
//! - [`exact`]: the complete-graph birth–death chain and its fixed point.
//! - [`dual`]: the edge-particle dual on a ring.
//! - [`cli`]: CSV experiment runner.

pub mod cli;
pub mod dual;
pub mod dynamics;
pub mod engine;
mod error;
pub mod exact;
pub mod graph;

pub use error::{Error, Result};
