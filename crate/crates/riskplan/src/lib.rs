//! Scenario files, trace CSVs, batch campaigns and the `riskplan` CLI.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod scenario_file;
pub mod trace_csv;

pub use error::{Error, Result};
pub use riskplan_core as core;
