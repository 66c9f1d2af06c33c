//! Command-line front end for the simulation and profiling pipeline:
//! characterize a platform, synthesize a gate schedule, simulate it,
//! validate the trace, and render reports.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod csvio;
mod error;
mod svg;

#[derive(Parser)]
#[command(
    name = "tsnsim",
    version,
    about = "Deterministic 802.1Qbv network emulation: characterize, schedule, simulate, validate, report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure a platform profile's latencies and intrinsic jitter on the
    /// fixed two-bridge chain with all gates open.
    Characterize(commands::characterize::Args),
    /// Synthesize per-stream offsets and per-port gate control lists.
    Schedule(commands::schedule::Args),
    /// Replay a schedule through the event-driven simulator.
    Simulate(commands::simulate::Args),
    /// Validate a trace against its schedule: deadlines, gate pass-through,
    /// jitter bounds.
    Validate(commands::validate::Args),
    /// Summaries and SVG box plots from trace CSVs.
    Report(commands::report::Args),
    /// Dump per-port gate timelines as CSV (time_ns, mask).
    Gates(commands::gates::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Characterize(args) => commands::characterize::run(args),
        Command::Schedule(args) => commands::schedule::run(args),
        Command::Simulate(args) => commands::simulate::run_cmd(args),
        Command::Validate(args) => commands::validate::run(args),
        Command::Report(args) => commands::report::run(args),
        Command::Gates(args) => commands::gates::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
