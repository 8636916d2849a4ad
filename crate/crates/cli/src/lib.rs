//! Command-line front end: configuration, dataset and artifact I/O, and the
//! subcommand runners.

pub mod artifacts;
pub mod config;
pub mod dataset;
pub mod runner;
pub mod svg;

pub use config::{ReportOptions, RunConfig};
pub use dataset::{read_dataset, write_dataset};
pub use runner::{econ_from_draws, run_econ, run_fit, run_sens, run_simulate, run_summary};
