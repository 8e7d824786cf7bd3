//! Benchmark harness and command-line front end for `ibp-core`.
//!
//! [`run_bench`] sweeps horizon lengths, generates one instance per Monte
//! Carlo run, runs every requested strategy on it and records cost, expanded
//! nodes, runtime and deviation from the IBP cost. Output is deterministic
//! for a fixed configuration except for the elapsed-time columns.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{BenchConfig, ScenarioSource};
pub use error::{Error, Result};
pub use runner::{run_bench, run_seed, BenchRecord, BenchReport, Status, SummaryRow};
pub use verify::{verify, VerifyConfig, VerifyReport};
