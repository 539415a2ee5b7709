//! The text format, the command surface and the JSON reports for
//! `sitecalc`.

pub mod commands;
pub mod corpus;
pub mod dsl;
pub mod report;

pub use commands::{parse_args, parse_flat_mode, run, RunOptions, COMMANDS};
pub use dsl::{parse, print, Document, DslError};
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Dsl(#[from] DslError),
    #[error("unknown {kind} `{name}`")]
    Unresolved { kind: &'static str, name: String },
    #[error(transparent)]
    Core(#[from] sitecalc::Error),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("{0}")]
    Args(String),
}
