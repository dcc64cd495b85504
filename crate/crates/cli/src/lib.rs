//! Scenario driver for the damped Euler–Riesz laboratory.
//!
//! A run is described by a TOML [`RunConfig`]; each subcommand of the
//! `riesz-lab` binary maps to one function in [`scenarios`].

pub mod config;
pub mod error;
pub mod initial;
pub mod output;
pub mod scenarios;
pub mod selftest;

pub use config::{RunConfig, ScenarioKind};
pub use error::{LabError, LabResult};
pub use initial::{Family, InitialConditionSpec, Target};
pub use scenarios::{run_scenario, Outcome};
