//! Command-line front end: run configuration files, command dispatch and
//! artifact writing on top of `hdfa-core`.

pub mod commands;
pub mod config;
pub mod reference;
pub mod units;

pub use commands::{run_command, Command, CommandError, Outcome};
pub use config::{parse_config, parse_fiber, ConfigError, RunConfig};
pub use reference::{ReferenceRow, ReferenceTable};
pub use units::{parse_quantity, Quantity, UnitError};
