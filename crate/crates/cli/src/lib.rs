//! Library side of the `llmshap` binary. Every subcommand writes its
//! human-readable output to a caller-supplied writer, so the commands can be
//! driven from tests without spawning a process.

use std::fmt;
use std::io::Write;

pub mod args;
pub mod commands;
pub mod methods;
mod report;
mod source;

pub use args::{Cli, Command};
pub use methods::{parse_methods, MethodSpec};
pub use report::RunConfig;

/// Invalid flag combination or input the user has to fix. Maps to exit
/// code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// How a command that ran to completion ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The audit matrix differs from the expected pattern.
    Mismatch,
}

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub fn run(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Attribute(a) => commands::attribute::run(a, out),
        Command::Audit(a) => commands::audit::run(a, out),
        Command::Bench(a) => commands::bench::run(a, out),
        Command::Compare(a) => commands::compare::run(a, out),
        Command::IngestCheck(a) => commands::ingest::run(a, out),
    }
}

pub fn exit_code(result: &anyhow::Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => EXIT_SUCCESS,
        Ok(Outcome::Mismatch) => EXIT_FAILURE,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => EXIT_USAGE,
        Err(_) => EXIT_FAILURE,
    }
}
