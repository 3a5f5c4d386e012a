//! Configuration, reports and the verification suite behind the `derham` binary.

pub mod config;
pub mod error;
pub mod report;
pub mod suite;

pub use config::SuiteConfig;
pub use error::CliError;
pub use report::{Check, Comparison, Format, Report, Verdict};
pub use suite::run_suite;
