//! `tsnsim schedule`: synthesize release offsets and gate programs, verify
//! them analytically, and write the schedule artifacts.

use std::path::PathBuf;

use tsnsim::scheduler::{check_schedule, synthesize, NetworkParams, SchedulerError};

use crate::config::{self, load_streams, load_topology, parse_time_flag, resolve_out_dir};
use crate::error::{CliError, CliResult};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    streams: PathBuf,
    /// Network-parameters JSON file (bridge_latency_bound, intrinsic_jitter).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override the bridge residence planning bound, e.g. `200us`.
    #[arg(long)]
    bridge_latency_bound: Option<String>,
    /// Override the intrinsic jitter margin, e.g. `500us`.
    #[arg(long)]
    intrinsic_jitter: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &Args) -> CliResult {
    let topology = load_topology(&args.topology)?;
    let streams = load_streams(&args.streams, &topology, false)?;

    let mut params = match &args.params {
        Some(path) => {
            let text = config::read_to_string(path)?;
            serde_json::from_str::<NetworkParams>(&text).map_err(|e| {
                CliError::config(format!("invalid params file {}: {e}", path.display()))
            })?
        }
        None => NetworkParams::default(),
    };
    if let Some(v) = &args.bridge_latency_bound {
        params.bridge_latency_bound = parse_time_flag(v, "bridge-latency-bound")?;
    }
    if let Some(v) = &args.intrinsic_jitter {
        params.intrinsic_jitter = parse_time_flag(v, "intrinsic-jitter")?;
    }

    let schedule = match synthesize(&streams, &topology, &params) {
        Ok(s) => s,
        Err(e @ SchedulerError::Infeasible { .. }) => {
            return Err(CliError::Infeasible(e.to_string()))
        }
        Err(SchedulerError::BadInput(m)) => return Err(CliError::config(m)),
        Err(e) => return Err(CliError::Internal(anyhow::anyhow!(e.to_string()))),
    };

    let report = check_schedule(&schedule, &streams, &topology, &params);
    print!("{report}");
    if !report.is_feasible() {
        return Err(CliError::Internal(anyhow::anyhow!(
            "synthesized schedule failed its own analytic check"
        )));
    }

    let out = resolve_out_dir(args.out.as_deref())?;
    config::write_json(&out, "schedule.json", &schedule)?;
    config::write_json(&out, "feasibility.json", &report)?;
    // One deployable gate program per bridge egress port.
    for (port, gcl) in &schedule.gcls {
        if topology.is_bridge(&port.node) {
            config::write_json(&out, &format!("gcl_{}.json", port.file_stem()), gcl)?;
        }
    }
    println!(
        "schedule: {} windows across {} ports, hyperperiod {}",
        schedule.windows.len(),
        schedule.gcls.len(),
        tsnsim::time::format_us(schedule.hyperperiod)
    );
    println!("wrote {}", out.join("schedule.json").display());
    Ok(())
}
