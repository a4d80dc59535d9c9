//! File formats and the `isoprofile` command-line front end.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod range;

pub use cli::{run, Outcome};
pub use error::CliError;
