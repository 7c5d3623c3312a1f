//! Command-line front end: config files, parameter sweeps and CSV output.

pub mod config;
pub mod output;
pub mod sweep;
