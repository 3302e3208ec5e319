//! Command line, run configuration and file formats for the
//! `ratingwave-core` toolkit.
//!
//! The binary is a thin wrapper around [`dispatch`]; the pieces are public so
//! the acceptance suite and other tools can drive them directly.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use commands::{dispatch, random_probe as resolvent_probe};
pub use error::{CliError, CliResult};
