//! Command-line companion to `qphase-core`: TOML run configs, CSV results,
//! and plot-ready data files.

pub mod config;
pub mod plot;
pub mod run;
pub mod table;
