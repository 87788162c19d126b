//! Experiment driver for `ergolin-core`: configuration files, report
//! formats, the acceptance suite and the `ergolin` command line.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;
pub mod suite;

pub use error::{DriverError, Result};
