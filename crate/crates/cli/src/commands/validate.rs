//! `tsnsim validate`: check a finished trace against its schedule —
//! deadlines, gate pass-through, and per-stream jitter bounds.

use std::path::PathBuf;

use tsnsim::profiler::{pass_through, pass_through_csv};
use tsnsim::scheduler::{validate_against_trace, SchedulerError};
use tsnsim::time::format_us;

use crate::config::{
    self, load_schedule, load_streams, load_topology, load_traces, resolve_out_dir,
};
use crate::error::{CliError, CliResult};

#[derive(clap::Args)]
pub struct Args {
    /// Full trace artifact (traces.json) from `tsnsim simulate`.
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    streams: PathBuf,
    /// Accept streams whose deadline exceeds their period.
    #[arg(long)]
    relax_deadlines: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &Args) -> CliResult {
    let topology = load_topology(&args.topology)?;
    let streams = load_streams(&args.streams, &topology, args.relax_deadlines)?;
    let schedule = load_schedule(&args.schedule)?;
    let traces = load_traces(&args.traces)?;

    let validation = match validate_against_trace(&schedule, &streams, &traces) {
        Ok(v) => v,
        Err(e @ SchedulerError::TraceMismatch { .. }) => {
            return Err(CliError::config(e.to_string()))
        }
        Err(e) => return Err(CliError::Internal(anyhow::anyhow!(e.to_string()))),
    };

    print!("{validation}");

    let out = resolve_out_dir(args.out.as_deref())?;
    config::write_json(&out, "validation.json", &validation)?;
    let mut ports: Vec<_> = schedule.gcls.keys().cloned().collect();
    ports.retain(|p| schedule.windows_on(p).next().is_some());
    println!("pass-through per port:");
    for port in &ports {
        let rows = pass_through(&traces, &schedule, port)
            .map_err(|e| CliError::Internal(anyhow::anyhow!(e.to_string())))?;
        config::write_file(
            &out,
            &format!("pass_through_{}.csv", port.file_stem()),
            &pass_through_csv(&rows),
        )?;
        let within = rows.iter().filter(|r| r.within).count();
        let worst = rows
            .iter()
            .map(|r| r.width - r.complete_offset)
            .min()
            .map(format_us)
            .unwrap_or_else(|| "-".into());
        println!(
            "  {port}: {within}/{} inside their window, tightest closing margin {worst}",
            rows.len()
        );
    }

    if validation.pass() {
        println!("validation passed");
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} violation(s); see report above",
            validation.violations.len()
        )))
    }
}
