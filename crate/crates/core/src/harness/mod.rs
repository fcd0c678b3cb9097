//! Configuration, initial data, experiment drivers, output and the CLI.

pub mod cli;
pub mod config;
pub mod drivers;
pub mod emit;
pub mod initial;

pub use cli::{execute, Cli, Command, Outcome};
pub use config::{RunConfig, CONFIG_VERSION};
pub use emit::Provenance;
pub use initial::{Component, InitialData};
