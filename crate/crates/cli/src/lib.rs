//! Scenario runner and comparison harness for [`lossrate`].
//!
//! A scenario is a JSON document naming a model, a time grid, expansion
//! orders and observables. [`scenario::run`] evaluates the exact solver, the
//! coefficient hierarchy and the model's closed forms on one grid and writes
//! a CSV per job plus a JSON summary.

pub mod config;
pub mod csv;
pub mod error;
pub mod presets;
pub mod scenario;
pub mod validate;

pub use config::{Overrides, ScenarioConfig};
pub use error::HarnessError;
pub use scenario::{compare, run, ComparisonReport, RunSummary};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
