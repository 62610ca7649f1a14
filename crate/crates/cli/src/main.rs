//! `extsqd` command-line driver.
//!
//! Every subcommand reads an optional INI file plus `--key value` overrides
//! and writes one JSON result document. Exit codes: 0 success, 2 input or
//! configuration error, 3 solver failure or non-convergence.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Keys present in every result document, in output order.
const DOCUMENT_KEYS: [&str; 23] = [
    "schema_version",
    "program",
    "command",
    "method",
    "seed",
    "config",
    "hamiltonian",
    "sector",
    "roots",
    "dimensions",
    "sampling",
    "seed_state",
    "sqd_energies",
    "generators",
    "tallies",
    "traces",
    "observables",
    "fits",
    "statistics",
    "tables",
    "warnings",
    "converged",
    "timing",
];

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Command {
    /// Exact diagonalization in the full sector.
    Fci,
    /// Sample-based diagonalization with configuration recovery.
    Sqd,
    /// SQD followed by excitation-based subspace extension.
    ExtSqd,
    /// Quantum subspace expansion around the SQD ground state.
    Qse,
    /// Draw samples and write them to a file.
    Sample,
    /// Spin and charge observables of a stored state.
    Observables,
    /// Morse and power-law fits of potential energy curves.
    Fit,
    /// Write a model Hamiltonian as an FCIDUMP.
    Model,
    /// Particle-number statistics of a samples file.
    Stats,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Parser, Debug)]
#[command(name = "extsqd", version, about = "Sample-based quantum diagonalization with subspace extension")]
struct Cli {
    command: Command,
    /// INI configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Result JSON path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "EXTSQD_WORKERS")]
    workers: Option<usize>,
    /// Configuration overrides as `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

fn document(cmd: Command, cfg: &RunConfig, outcome: commands::Outcome, timing: Value) -> Value {
    let mut body = outcome.body;
    let seed = cfg.str("seed").and_then(|s| s.parse::<u64>().ok());
    body.insert("schema_version".into(), json!(SCHEMA_VERSION));
    body.insert("program".into(), json!({"name": "extsqd", "version": env!("CARGO_PKG_VERSION")}));
    body.insert("command".into(), json!(cmd.name()));
    body.insert("seed".into(), json!(seed));
    body.insert("config".into(), json!(cfg.values()));
    body.insert("converged".into(), json!(outcome.converged));
    body.insert("timing".into(), timing);
    let mut doc = Map::new();
    for key in DOCUMENT_KEYS {
        doc.insert(key.into(), body.remove(key).unwrap_or(Value::Null));
    }
    debug_assert!(body.is_empty(), "undeclared keys: {:?}", body.keys().collect::<Vec<_>>());
    Value::Object(doc)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Input("workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let cfg = RunConfig::load(cli.command, cli.config.as_deref(), &cli.overrides)?;
    let outcome = commands::run(cli.command, &cfg)?;
    let converged = outcome.converged;
    let timing = json!({
        "total_seconds": clock.elapsed().as_secs_f64(),
        "stages": outcome.stages.clone(),
        "workers": rayon::current_num_threads(),
        "started_unix": started,
    });
    let doc = document(cli.command, &cfg, outcome, timing);
    let text = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(converged)
}

/// Moves driver flags that appear after the first override back into `cli`.
fn hoist_flags(cli: &mut Cli) -> Result<(), CliError> {
    let mut rest = Vec::new();
    let mut it = std::mem::take(&mut cli.overrides).into_iter();
    while let Some(arg) = it.next() {
        let (flag, inline) = match arg.split_once('=') {
            Some((f, v)) => (f.to_string(), Some(v.to_string())),
            None => (arg.clone(), None),
        };
        if !matches!(flag.as_str(), "-o" | "--output" | "-c" | "--config" | "--workers") {
            rest.push(arg);
            continue;
        }
        let value = inline
            .or_else(|| it.next())
            .ok_or_else(|| CliError::Input(format!("{flag} needs a value")))?;
        match flag.as_str() {
            "-o" | "--output" => cli.output = Some(value.into()),
            "-c" | "--config" => cli.config = Some(value.into()),
            _ => {
                let w = value
                    .parse()
                    .map_err(|_| CliError::Input(format!("invalid worker count {value:?}")))?;
                cli.workers = Some(w);
            }
        }
    }
    cli.overrides = rest;
    Ok(())
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if let Err(e) = hoist_flags(&mut cli) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: solver did not converge");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
