//! Configuration, file formats, parallel rate evaluation and the command
//! workflows behind the `ephkin` binary.

pub mod commands;
pub mod config;
pub mod kernel_table;
pub mod output;
pub mod parallel;
pub mod polynomial;
pub mod sampling;

pub use commands::{
    equilibrium, simulate, validate, EquilibriumQuery, SimulateSummary, Stiffness, ValidationReport,
};
pub use config::{load_config, parse_config, ConfigError, LoadError, RunConfig};
