//! Command line, configuration, reports and plot data for `lowpass-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod filter_spec;
pub mod plot;
pub mod report;

pub use cli::run;
pub use config::RunConfig;
pub use error::CliError;
pub use report::Report;
