//! Command-line front end for the `homsim` interferometer simulator.

pub mod commands;
pub mod rows;

pub use commands::{
    cmd_classify, cmd_ensemble, cmd_parse_check, cmd_run, cmd_sweep, CircuitSource, CliError,
    Engine, EnsembleSpec, Param, RunConfig,
};
pub use rows::{emit, Format, ResultRow};
