//! Library side of the `hvrfif` command-line tool: configuration loading,
//! built-in examples, artifact writers and command implementations.

pub mod builtin;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{build, load_config, Built, RunConfig};
pub use error::CliError;
