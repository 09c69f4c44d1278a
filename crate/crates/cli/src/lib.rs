//! Command-line experiment driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command};
pub use commands::Outcome;
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::RunWht(a) => commands::cmd_run_wht(a),
        Command::RunPerturbation(a) => commands::cmd_run_perturbation(a),
        Command::ScalingSweep(a) => commands::cmd_scaling_sweep(a),
        Command::VerifyLemma(a) => commands::cmd_verify_lemma(a),
        Command::VerifyTheorem2(a) => commands::cmd_verify_theorem2(a),
    }
}

fn writes_csv_to_stdout(cli: &Cli) -> bool {
    let out = match &cli.command {
        Command::RunWht(a) | Command::RunPerturbation(a) => &a.output,
        Command::ScalingSweep(a) => &a.output,
        Command::VerifyLemma(a) => &a.output,
        Command::VerifyTheorem2(a) => &a.output,
    };
    out.out.is_none()
}

/// Parses `args`, runs the command and maps the outcome to an exit code:
/// 0 when every assertion holds, 1 when one fails, 2 on usage or I/O errors.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // Keep stdout clean for CSV when no --out was given.
    let mut sink: Box<dyn Write> = if writes_csv_to_stdout(&cli) {
        Box::new(std::io::stderr())
    } else {
        Box::new(std::io::stdout())
    };
    for line in &outcome.summary {
        let _ = writeln!(sink, "{line}");
    }
    for f in &outcome.failures {
        let _ = writeln!(sink, "FAILED: {f}");
    }
    if outcome.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
