//! The `tsm` command-line tool: checking, simulating and analysing
//! transition-system models, and serving them over HTTP.

pub mod commands;
pub mod repl;
pub mod serve;

mod render;

pub use commands::{run, Cli, Command, EXIT_ERROR, EXIT_FINDINGS, EXIT_OK};
