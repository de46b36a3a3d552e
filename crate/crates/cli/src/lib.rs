//! Command-line front end for insightkit: spec files, bundled scenarios,
//! metrics, objective matching and DOT/CSV export.

pub mod commands;
mod error;
pub mod export;
pub mod scenarios;
pub mod spec_file;

pub use error::CliError;
