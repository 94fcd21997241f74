//! `crmpst`: check, verify, simulate, type-check and run crash-stop protocols.

mod commands;
mod report;
mod style;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes shared by all commands.
pub mod exit {
    pub const OK: u8 = 0;
    /// Diagnostics, a violated property or a failed type check.
    pub const FAILED: u8 = 1;
    pub const IO: u8 = 2;
    /// A bound was exhausted before a verdict was reached.
    pub const INCONCLUSIVE: u8 = 3;
}

#[derive(Parser)]
#[command(name = "crmpst", version, about = "Multiparty session types with crash-stop failures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, check well-formedness and print the projections.
    Check { path: PathBuf },
    /// Check safety, deadlock-freedom, liveness and correspondence of the
    /// projected configuration.
    Verify(VerifyArgs),
    /// Explore the global type or the configuration breadth-first.
    Simulate(SimulateArgs),
    /// Type-check a process script against a protocol.
    Typecheck {
        protocol: PathBuf,
        processes: PathBuf,
        /// Warn instead of failing on receive branches the type does not offer.
        #[arg(long)]
        lenient: bool,
    },
    /// Run a process script, optionally injecting crashes.
    Run(RunArgs),
}

#[derive(Args)]
pub struct VerifyArgs {
    pub path: PathBuf,
    /// Maximum messages per queue.
    #[arg(long, default_value_t = 8)]
    pub bound: usize,
    #[arg(long, default_value_t = 100_000)]
    pub state_bound: usize,
    /// Maximum length of a reported liveness cycle.
    #[arg(long, default_value_t = 12)]
    pub cycle_bound: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct SimulateArgs {
    pub path: PathBuf,
    /// Explore the annotated global type (default).
    #[arg(long, conflicts_with = "config")]
    pub global: bool,
    /// Explore the projected configuration.
    #[arg(long)]
    pub config: bool,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Args)]
pub struct RunArgs {
    pub protocol: PathBuf,
    pub processes: PathBuf,
    /// Randomize crashes and interleaving with this seed.
    #[arg(long, conflicts_with = "crash")]
    pub seed: Option<u64>,
    /// Per-step crash probability of seeded runs.
    #[arg(long, default_value_t = 0.05)]
    pub crash_probability: f64,
    /// Crash budget of seeded runs.
    #[arg(long, default_value_t = 1)]
    pub max_crashes: usize,
    /// Crash ROLE before step STEP, e.g. `C@0`. Repeatable.
    #[arg(long, value_name = "ROLE@STEP")]
    pub crash: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    /// Write the trace as JSON to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print the trace as JSON on stdout.
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { path } => commands::check(&path),
        Command::Verify(args) => commands::verify(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Typecheck { protocol, processes, lenient } => commands::typecheck(&protocol, &processes, lenient),
        Command::Run(args) => commands::run(&args),
    };
    ExitCode::from(code)
}
