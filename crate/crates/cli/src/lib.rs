//! Scenario runner for the entcat library: parses scenario files, runs the
//! requested check and writes a deterministic JSON report.

pub mod commands;
pub mod error;
pub mod families;
pub mod report;
pub mod scenario;

pub use commands::execute;
pub use error::{CliError, Result};
pub use report::{emit_plotdata, Check, Report, Series};
pub use scenario::{Command, Scenario};
