//! Batch driver for paired MV / CV experiments.
//!
//! Three commands share one config format (see [`config::RunConfig`]):
//!
//! * `run` executes a paired comparison per dataset, algorithm and inner k
//!   and writes result JSON, score CSVs, a resource table and a manifest.
//! * `report` turns result files into Bayesian triples, capacity summaries
//!   and plot-ready CSVs.
//! * `sweep-features` repeats the comparison over ANOVA top-K feature subsets.

pub mod cli;
pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod run;
pub mod stats;
pub mod sweep;

pub use error::{CliError, Result};
