//! Command-line front end: JSON experiment configs in, CSV patterns and a
//! JSON report out.

pub mod app;
pub mod config;
pub mod error;
pub mod presets;
pub mod report;

pub use app::main_with_args;
pub use error::CliError;
