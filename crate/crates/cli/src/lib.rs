//! File formats, configuration and verbs of the `mahm` command-line tool.

pub mod config;
pub mod error;
pub mod io;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};
