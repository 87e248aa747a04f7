//! Experiment runner: TOML configs in, CSV tables out.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod config;
mod export;
mod run;

pub use config::{
    Experiment, ExperimentConfig, IntervalPreset, OutputsConfig, SolverConfig, SolverKind, SolverPlan, SOLVER_NAMES,
};
pub use export::{export_problem, load_exported, ExportedProblem};
pub use run::{filters_csv, format_number, history_csv, read_csv, run_experiment, SolverSummary};

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::problems::{ProblemSpec, PROBLEM_DESCRIPTIONS, PROBLEM_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hcmrh",
    version,
    about = "Inner-product-free Krylov regularization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more experiment configs (independent configs run in parallel).
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// List the available test problems.
    ListProblems,
    /// Write A, x_true, b_exact, b and e of a problem as text files.
    Export {
        /// e.g. `shaw:n=64,nl=1e-2,seed=3`
        spec: String,
        dir: PathBuf,
    },
}

/// Exit status for an error: 2 for configuration problems, 3 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// The problem table printed by `list-problems`.
pub fn list_problems() -> String {
    let mut out = String::new();
    for (name, desc) in PROBLEM_NAMES.iter().zip(PROBLEM_DESCRIPTIONS) {
        out.push_str(&format!("{name:<18}{desc}\n"));
    }
    out
}

/// Loads, validates and runs one config file.
pub fn run_config(path: &Path) -> crate::Result<Vec<SolverSummary>> {
    let config = ExperimentConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let exp = config.validate(base)?;
    run_experiment(&exp)
}

fn run_many(configs: &[PathBuf]) -> i32 {
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_config(c))).collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(crate::error::invalid("run", "experiment panicked")))
            })
            .collect()
    });
    let (mut config_failed, mut runtime_failed) = (false, false);
    for (path, result) in configs.iter().zip(results) {
        match result {
            Ok(summaries) => {
                println!("{}", path.display());
                for s in summaries {
                    println!(
                        "  {:<16} iterations {:>4}  stop {:<14} rel_error {}",
                        s.label,
                        s.iterations,
                        s.stop_reason,
                        format_number(s.relative_error)
                    );
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                match exit_code(&e) {
                    EXIT_CONFIG => config_failed = true,
                    _ => runtime_failed = true,
                }
            }
        }
    }
    // a config error anywhere outranks runtime failures elsewhere
    if config_failed {
        EXIT_CONFIG
    } else if runtime_failed {
        EXIT_RUNTIME
    } else {
        EXIT_OK
    }
}

/// Entry point behind the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { configs } => run_many(&configs),
        Command::ListProblems => {
            print!("{}", list_problems());
            EXIT_OK
        }
        Command::Export { spec, dir } => match ProblemSpec::parse(&spec).and_then(|s| export_problem(&s, &dir)) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}
