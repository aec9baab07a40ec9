//! The `akconj` command line. [`run`] returns the process exit code: 0 when every
//! certificate passes, 1 on a failed certificate or an exhausted budget, 2 on a
//! configuration error.

mod args;
mod commands;
mod config;
mod output;
mod svg;

use clap::Parser;

pub use args::{Cli, Command};
pub use config::{parse_observable, CliConfig};
pub use output::{write_atomic, Emit};

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "AKCONJ_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or preconditions.
    Config(String),
    /// Runtime failure after a valid start.
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<akconj_core::Error> for CliError {
    fn from(e: akconj_core::Error) -> Self {
        use akconj_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::PrereqViolated(_) => CliError::Config(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|()| commands::dispatch(cli.command));
    match result {
        Ok(passed) => {
            if passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
