//! Harness for the high-field Wigner-BGK / quantum drift-diffusion toolkit:
//! JSON configuration, CSV emission, Knudsen-number sweeps with order
//! fitting, the invariant self-test, and the command-line front end.
//!
//! All numerics live in [`hfqdd_core`]; this crate only orchestrates.

pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod selftest;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
