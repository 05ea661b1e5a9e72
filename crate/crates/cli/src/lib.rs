//! Batch runner for the `hypoelliptic` crate: invariant suites, flows,
//! attainable sets, Martin quotients, kernels and the grid solver.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{Config, Format, Overrides};

/// Failures that stop a command before it produces a report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or inputs.
    #[error("configuration error: {0}")]
    Config(String),
    /// Reading or writing files.
    #[error("io error: {0}")]
    Io(String),
    /// Rejected by the library.
    #[error(transparent)]
    Core(#[from] hypoelliptic::Error),
}

/// Command line.
#[derive(Debug, Parser)]
#[command(name = "hypo", version, about = "Experiments on hypoelliptic operator models")]
pub struct Cli {
    /// What to run.
    #[command(subcommand)]
    pub command: Command,
    /// Model name, or `all` for `verify`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Suites for `verify` (repeatable, comma separated).
    #[arg(long = "suite", global = true, value_delimiter = ',')]
    pub suites: Vec<String>,
    /// RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

/// Subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// List the model catalog.
    Models,
    /// Run invariant suites.
    Verify,
    /// Integrate one constant-control exponential.
    Flow,
    /// Sample the attainable set and classify endpoints.
    Reach,
    /// Martin quotient convergence table.
    Martin,
    /// Finite-difference Cauchy problem.
    Solve,
    /// Fundamental-solution values and residuals.
    Kernel,
}

/// Exit code: 0 when every check passes, 1 on a failed check, 2 on bad input.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "hypo: {e}");
            2
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let config = config.apply(Overrides {
        model: cli.model,
        suites: cli.suites,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        timing: cli.timing,
    });
    let emit = |bytes: &[u8], out: &Option<PathBuf>, stdout: &mut dyn Write| match out {
        Some(path) => output::write_atomic(path, bytes),
        None => stdout.write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    };
    if cli.command == Command::Models {
        emit(commands::models(config.format).as_bytes(), &config.out, stdout)?;
        return Ok(0);
    }
    let (format, out, timing) = (config.format, config.out.clone(), config.timing);
    let outcome = match cli.command {
        Command::Models => unreachable!("handled above"),
        Command::Verify => commands::verify(config)?,
        Command::Flow => commands::flow(config)?,
        Command::Reach => commands::reach(config)?,
        Command::Martin => commands::martin(config)?,
        Command::Solve => commands::solve(config)?,
        Command::Kernel => commands::kernel(config)?,
    };
    for (path, bytes) in &outcome.tables {
        output::write_atomic(path, bytes)?;
    }
    let mut report = outcome.report;
    if timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(text.as_bytes(), &out, stdout)?;
    Ok(if report.all_passed() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("hypo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("verify"));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = run_args(&["models", "--bogus"]);
        assert_eq!(code, 2);
        assert!(!err.is_empty());
    }

    #[test]
    fn unknown_model_is_config_error() {
        assert_eq!(run_args(&["flow", "--model", "nope"]).0, 2);
    }

    #[test]
    fn suite_flag_splits_on_commas() {
        let cli = Cli::try_parse_from(["hypo", "verify", "--suite", "groups,fields", "--suite", "flows"]).unwrap();
        assert_eq!(cli.suites, ["groups", "fields", "flows"]);
    }
}
