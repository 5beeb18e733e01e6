//! File formats, experiment configuration and the batch commands behind the
//! `qmak` binary.

pub use qmak_core as core;

pub mod calibrate;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod harness;
pub mod strategy;

pub use error::{CliError, Result};
