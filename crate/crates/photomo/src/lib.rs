//! Std companion to `photomo-core`: file formats, node-parallel table construction and the
//! command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::{CliError, CliResult};
pub use parallel::build_table_parallel;
