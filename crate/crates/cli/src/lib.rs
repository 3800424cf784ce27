//! Library side of the command-line driver, split out so integration tests
//! can exercise report rendering and the file formats directly.

pub mod commands;
pub mod error;
pub mod files;
pub mod report;

pub use commands::{Outcome, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{Format, Report};
