//! `scn`: command-line front end to the network formation engine.
//!
//! Exit codes: 0 on success, 2 for invalid input (flags, parameters, files),
//! 1 for internal failures such as an unwritable output path.

mod args;
mod commands;

use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use scn_core::ScnError;
use serde_json::Value;

use args::{Cli, Command};

#[derive(Debug)]
pub enum Failure {
    /// Bad user input.
    Invalid(String),
    Internal(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Internal(m) => f.write_str(m),
        }
    }
}

impl From<ScnError> for Failure {
    fn from(e: ScnError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

/// Rounds every non-integer number to 12 significant digits.
pub fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(scn_core::phase::round_sig12(x)))
            {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty-printed JSON with rounded numbers, to `out` or stdout.
pub fn emit_json(mut value: Value, out: Option<&Path>) -> CliResult<()> {
    round_numbers(&mut value);
    let text = serde_json::to_string_pretty(&value).map_err(|e| Failure::Internal(e.to_string()))? + "\n";
    emit_text(&text, out)
}

pub fn emit_text(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Internal(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Payoff(a) => commands::payoff(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Equilibria(a) => commands::equilibria(a),
        Command::Thresholds(a) => commands::thresholds(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Hetero(a) => commands::hetero(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(1)
        }
    }
}
