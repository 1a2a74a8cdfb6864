//! Configuration-driven experiment runner for the Dollard scattering lab.
//!
//! A run reads a flat `key = value` config ([`config`]), checks it without
//! propagating ([`validate`]), fans the per-probe jobs of one experiment out
//! to a worker pool ([`runner`]) and writes one CSV per report kind plus a
//! JSON manifest ([`output`]).

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;
pub mod validate;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{exit, CliError, Result};
pub use runner::{run, RunOptions, RunOutcome};
pub use validate::validate;
