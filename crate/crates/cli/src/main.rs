//! `qccc`: run preparation protocols, MPS bound sweeps and diagnostics from
//! the command line, writing JSON reports.
//!
//! Exit codes: 0 pass, 1 check failed, 2 bad configuration, 3 capacity
//! exceeded, 4 non-normal tensor without `--allow-blocks`.

mod commands;
mod config;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::{load, DiagnoseArgs, MpsArgs, PrepareArgs, RangeArgs, ShiftArgs};

/// Environment variable overriding the dense amplitude cap.
pub const MAX_AMPLITUDES_ENV: &str = "QCCC_MAX_AMPLITUDES";

#[derive(Parser)]
#[command(name = "qccc", version, about = "Finite-depth circuits with local measurements and classical communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preparation protocol (GHZ, W, RG fixed point, toric code) and certify it.
    Prepare(PrepareArgs),
    /// Canonical form, blocking bounds and the compiled preparation of an MPS.
    Mps(MpsArgs),
    /// Factorization witness, area-law audit or Clifford-unitary certification.
    Diagnose(DiagnoseArgs),
    /// Lieb-Robinson range of a circuit's unitary.
    Range(RangeArgs),
    /// Depth-2 ancilla implementation of the lattice translation.
    Shift(ShiftArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(qccc::Error),
}

impl From<qccc::Error> for CliError {
    fn from(e: qccc::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "configuration error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use qccc::Error::*;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Invalid(_) | Json(_) | Io(_) | NonClifford(_) | Register(_) | Circuit(_) => 2,
                Capacity { .. } | BranchCap(_) => 3,
                NotNormal(_) => 4,
                _ => 1,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Result of one command: the report body and whether the check passed.
pub struct Outcome {
    pub passed: bool,
    pub report: Value,
}

fn apply_capacity_env() -> CliResult<()> {
    if let Ok(v) = std::env::var(MAX_AMPLITUDES_ENV) {
        let n: u64 = v.trim().parse().map_err(|_| CliError::Config(format!("{MAX_AMPLITUDES_ENV}={v} is not an integer")))?;
        qccc::capacity::set_max_amplitudes(n);
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<(Outcome, Option<std::path::PathBuf>, &'static str, Value)> {
    apply_capacity_env()?;
    Ok(match cli.command {
        Command::Prepare(a) => {
            let a = load(a)?;
            let out = a.out.clone();
            (commands::prepare(&a)?, out, "prepare", to_value(&a))
        }
        Command::Mps(a) => {
            let a = load(a)?;
            let out = a.out.clone();
            (commands::mps(&a)?, out, "mps", to_value(&a))
        }
        Command::Diagnose(a) => {
            let a = load(a)?;
            let out = a.report.clone();
            (commands::diagnose(&a)?, out, "diagnose", to_value(&a))
        }
        Command::Range(a) => {
            let a = load(a)?;
            let out = a.out.clone();
            (commands::range(&a)?, out, "range", to_value(&a))
        }
        Command::Shift(a) => {
            let a = load(a)?;
            let out = a.out.clone();
            (commands::shift(&a)?, out, "shift", to_value(&a))
        }
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli) {
        Ok((outcome, path, name, config)) => {
            let report = json!({
                "command": name,
                "version": env!("CARGO_PKG_VERSION"),
                "config": config,
                "passed": outcome.passed,
                "result": outcome.report,
                "timing": { "elapsed_ms": start.elapsed().as_millis() as u64 },
            });
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match path {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, text + "\n") {
                        eprintln!("qccc: cannot write {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => println!("{text}"),
            }
            eprintln!("qccc {name}: {}", if outcome.passed { "pass" } else { "FAIL" });
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("qccc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
