//! `tsnsim simulate`: replay a schedule through the event-driven simulator
//! and export the trace artifacts.

use std::path::PathBuf;

use tsnsim::engine::{run, run_seeds, SimInput};
use tsnsim::model::hyperperiod;
use tsnsim::time::TimeNs;
use tsnsim::trace::TraceSet;

use crate::config::{
    self, build_probes, load_profile, load_schedule, load_streams, load_topology, parse_fault,
    resolve_out_dir,
};
use crate::error::{CliError, CliResult};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    streams: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    /// Platform preset or latency-model JSON file.
    #[arg(long, default_value = "C2")]
    profile: String,
    /// Simulated duration in hyperperiods.
    #[arg(long, default_value_t = 3)]
    hyperperiods: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Run this many consecutive seeds starting at --seed.
    #[arg(long)]
    parallel_seeds: Option<u64>,
    /// Worker threads for --parallel-seeds.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Timestamping method at both bridge points: M2.2 or M3.
    #[arg(long)]
    bridge_method: Option<String>,
    /// Timestamping method at the listener NIC: M2.1 or M3.
    #[arg(long)]
    t4_method: Option<String>,
    /// Switch the bridge probes (T2/T3) off.
    #[arg(long)]
    no_bridge_probes: bool,
    /// Delay one frame at its last bridge: `stream:seq:delay`, e.g. 0:3:2ms.
    #[arg(long)]
    fault: Option<String>,
    /// Accept streams whose deadline exceeds their period.
    #[arg(long)]
    relax_deadlines: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_trace(out: &std::path::Path, suffix: &str, traces: &TraceSet) -> CliResult {
    config::write_file(out, &format!("trace{suffix}.csv"), &traces.to_csv())?;
    config::write_json(out, &format!("traces{suffix}.json"), traces)?;
    config::write_json(out, &format!("trace{suffix}.meta.json"), &traces.meta)?;
    println!(
        "seed {}: {} generated, {} delivered, {} in flight -> trace{suffix}.csv",
        traces.meta.seed,
        traces.meta.frames_generated,
        traces.meta.frames_delivered,
        traces.meta.frames_in_flight
    );
    Ok(())
}

pub fn run_cmd(args: &Args) -> CliResult {
    if args.hyperperiods == 0 {
        return Err(CliError::config(
            "duration must be at least one hyperperiod",
        ));
    }
    let topology = load_topology(&args.topology)?;
    let streams = load_streams(&args.streams, &topology, args.relax_deadlines)?;
    let schedule = load_schedule(&args.schedule)?;
    let profile = load_profile(&args.profile)?;
    let probes = build_probes(
        args.bridge_method.as_deref(),
        args.t4_method.as_deref(),
        args.no_bridge_probes,
    )?;
    let fault = args.fault.as_deref().map(parse_fault).transpose()?;

    let h = hyperperiod(&streams).map_err(|e| CliError::config(e.to_string()))?;
    let duration = h
        .checked_mul(args.hyperperiods as i64)
        .ok_or_else(|| CliError::config("duration overflows 64-bit nanoseconds"))?;

    let input = SimInput {
        topology: &topology,
        streams: &streams,
        schedule: &schedule,
        model: &profile.model,
        probes: &probes,
        duration,
        seed: args.seed,
        profile_name: &profile.name,
        fault,
    };

    let out = resolve_out_dir(args.out.as_deref())?;
    match args.parallel_seeds {
        None => {
            let traces = run(&input).map_err(config::engine_error)?;
            write_trace(&out, "", &traces)?;
        }
        Some(0) => return Err(CliError::config("--parallel-seeds must be >= 1")),
        Some(n) => {
            let seeds: Vec<u64> = (0..n).map(|i| args.seed + i).collect();
            let results = run_seeds(&input, &seeds, args.threads).map_err(config::engine_error)?;
            for traces in &results {
                write_trace(&out, &format!("_s{}", traces.meta.seed), traces)?;
            }
        }
    }
    println!(
        "simulated {} hyperperiod(s) ({}) at instant zero {}",
        args.hyperperiods,
        tsnsim::time::format_us(duration),
        TimeNs::from_ns(schedule.instant_zero.as_ns())
    );
    Ok(())
}
