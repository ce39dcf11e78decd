//! Library half of the `volsamp` command-line tool: dataset readers, the
//! experiment runners, CSV output and the verification driver.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod output;
pub mod suite;

pub use error::{CliError, Result};

/// `git describe` of the source tree at build time, or `unknown`.
pub const BUILD_ID: &str = env!("VOLSAMP_BUILD_ID");
