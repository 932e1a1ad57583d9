//! File formats, run configuration, demo scenes and subcommands of the
//! `placeability` tool.

pub mod app;
pub mod config;
pub mod demo;
pub mod error;
pub mod io;
pub mod report;
pub mod scene;

pub use error::{CliError, Result};
