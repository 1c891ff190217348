//! `crflow` — run, sweep, check and convert potential-flow trajectories.
//!
//! Exit codes: 0 ok, 1 malformed config or invalid snapshot, 2 solver
//! failure, 3 hypothesis failure (or ε = 0 without the ladder), 4 no certified
//! limit, 5 selected checks failed.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "crflow", version, about = "Chern-Ricci flow on rotationally symmetric hyperbolic models")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for all artifacts.
    #[arg(long, global = true, env = "CRFLOW_OUT", default_value = "out")]
    out: PathBuf,

    /// Worker threads for parallel sweeps (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one flow and write its trajectory and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the regularization ladder and certify the diagonal limit.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also fail (exit 5) when the ε-uniformity gate fails.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate diagnostics on a trajectory file.
    Check {
        trajectory: PathBuf,
        /// Comma list of checks, or `all` for every applicable one.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        checks: Vec<String>,
        /// Threshold of the Kähler-Einstein residual at the final state.
        #[arg(long, default_value_t = 1e-3)]
        ke_threshold: f64,
    },
    /// Reparametrize a trajectory between the normalized and unnormalized flows.
    Convert {
        trajectory: PathBuf,
        /// Target frame.
        #[arg(long, value_enum)]
        direction: Direction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Normalized,
    Unnormalized,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Run { config } => commands::run(config, &cli.out),
        Command::Sweep { config, strict } => commands::sweep(config, &cli.out, *strict),
        Command::Check {
            trajectory,
            checks,
            ke_threshold,
        } => commands::check(trajectory, &cli.out, checks, *ke_threshold),
        Command::Convert { trajectory, direction } => commands::convert(trajectory, &cli.out, *direction),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
