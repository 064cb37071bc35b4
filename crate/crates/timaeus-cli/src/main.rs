//! `timaeus`: geometry verification, reaction tables, and cosmos runs.

mod manifest;
mod reactions;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simulate::RunFailure;

const EXIT_VERIFICATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_CONSERVATION: u8 = 4;

/// Print to stdout, tolerating a closed pipe: reading the head of a report
/// through `head` must not turn into a crash.
pub(crate) fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

#[derive(Parser)]
#[command(
    name = "timaeus",
    version,
    about = "Particle cosmology of the four elements: geometry checks, \
             reaction tables, and rotating-sphere simulation runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute the geometric figures and compare them with the
    /// documented verdicts
    Verify {
        /// Space-fill feasibility tolerance in degrees
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Enumerate canonical balanced reactions as CSV
    Reactions {
        /// Largest coefficient on either side (1 through 12)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=12))]
        max: u64,
        /// Write the table here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cosmos and write a per-step CSV plus a run manifest
    Simulate {
        /// Simulation config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Number of steps
        #[arg(long)]
        steps: u64,
        /// CSV output path; the manifest lands next to it
        #[arg(long)]
        out: PathBuf,
        /// Override the seed (beats TIMAEUS_SEED and the config)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the cosmos re-checking triangle conservation every step
    Audit {
        /// Simulation config (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Number of steps
        #[arg(long)]
        steps: u64,
        /// Override the seed (beats TIMAEUS_SEED and the config)
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, hide = true)]
        inject_fault_step: Option<u64>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify { tolerance } => match verify::run(tolerance) {
            Ok(()) => ExitCode::SUCCESS,
            Err(message) => {
                eprintln!("{message}");
                ExitCode::from(EXIT_VERIFICATION)
            }
        },
        Command::Reactions { max, out } => match reactions::run(max, out.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(message) => {
                eprintln!("{message}");
                ExitCode::from(EXIT_USAGE)
            }
        },
        Command::Simulate {
            config,
            steps,
            out,
            seed,
        } => report(simulate::run(&config, steps, &out, seed)),
        Command::Audit {
            config,
            steps,
            seed,
            inject_fault_step,
        } => report(simulate::audit(&config, steps, seed, inject_fault_step)),
    }
}

fn report(result: Result<(), RunFailure>) -> ExitCode {
    let (message, code) = match result {
        Ok(()) => return ExitCode::SUCCESS,
        Err(RunFailure::Usage(m)) => (m, EXIT_USAGE),
        Err(RunFailure::Diverged(m)) => (m, EXIT_DIVERGED),
        Err(RunFailure::Conservation(m)) => (m, EXIT_CONSERVATION),
    };
    // Write, never panic: a closed pipe must not mask the exit code.
    let _ = std::io::Write::write_all(&mut std::io::stderr(), message.as_bytes());
    let _ = std::io::Write::write_all(&mut std::io::stderr(), b"\n");
    ExitCode::from(code)
}
