use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use woldkit::run::{self, Command, Options};

/// Class-D diagnostics and Wold-type decompositions for band operators.
#[derive(Parser, Debug)]
#[command(name = "woldkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Solver tolerance for Gram solves and stopping rules.
    #[arg(long, global = true, default_value_t = run::DEFAULT_TOL)]
    tol: f64,
    /// Guard band for finite-section solves (default: derived from the operator).
    #[arg(long, global = true)]
    guard: Option<usize>,
    #[arg(long, global = true, default_value_t = run::DEFAULT_N_MAX)]
    n_max: usize,
    #[arg(long, global = true, default_value_t = run::DEFAULT_J_MAX)]
    j_max: usize,
    /// Cross-check against the dense finite-section oracle.
    #[arg(long, global = true)]
    oracle: bool,
    /// Seed for the random probe vectors.
    #[arg(long, global = true, default_value_t = woldkit_core::probes::DEFAULT_SEED)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Lower bound, class-D and pair diagnostics for an operator spec.
    Check { spec: PathBuf },
    /// Wold decomposition of a vector.
    Decompose {
        spec: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Fourfold split of a vector for a pair spec.
    Fourfold {
        spec: PathBuf,
        #[arg(long)]
        vector: PathBuf,
    },
    /// Operator families and spec examples.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand, Debug)]
enum ZooAction {
    List,
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Check { spec } => Command::Check { spec },
        Cmd::Decompose { spec, vector } => Command::Decompose { spec, vector },
        Cmd::Fourfold { spec, vector } => Command::Fourfold { spec, vector },
        Cmd::Zoo { action: ZooAction::List } => Command::ZooList,
    };
    let opts = Options { tol: cli.tol, guard: cli.guard, n_max: cli.n_max, j_max: cli.j_max, seed: cli.seed, oracle: cli.oracle };
    let outcome = run::execute(&command, &opts);
    for line in &outcome.diagnostics {
        eprintln!("{line}");
    }
    let text = serde_json::to_string_pretty(&outcome.report)? + "\n";
    match cli.out {
        Some(path) => std::fs::write(&path, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::from(outcome.exit as u8))
}
