//! `tsnsim gates`: debug dump of per-port gate timelines as CSV
//! (time_ns, mask).

use std::path::PathBuf;

use tsnsim::model::PortId;
use tsnsim::time::TimeNs;

use crate::config::{self, load_schedule, resolve_out_dir};
use crate::error::{CliError, CliResult};

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    schedule: PathBuf,
    /// Dump only this port (`node->next`); default is every port.
    #[arg(long)]
    port: Option<String>,
    /// Number of gate cycles to dump.
    #[arg(long, default_value_t = 1)]
    cycles: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &Args) -> CliResult {
    if args.cycles == 0 {
        return Err(CliError::config("cycles must be >= 1"));
    }
    let schedule = load_schedule(&args.schedule)?;
    let filter: Option<PortId> = match &args.port {
        None => None,
        Some(s) => {
            let (node, next) = s
                .split_once("->")
                .ok_or_else(|| CliError::config(format!("bad port {s:?}, expected node->next")))?;
            Some(PortId::new(node, next))
        }
    };
    if let Some(p) = &filter {
        if !schedule.gcls.contains_key(p) {
            return Err(CliError::config(format!("schedule has no port {p}")));
        }
    }

    let out = resolve_out_dir(args.out.as_deref())?;
    let mut written = 0usize;
    for (port, gcl) in &schedule.gcls {
        if let Some(f) = &filter {
            if f != port {
                continue;
            }
        }
        let from = gcl.base_time();
        let to = from
            + TimeNs::from_ns(
                gcl.cycle_time()
                    .as_ns()
                    .checked_mul(args.cycles as i64)
                    .ok_or_else(|| CliError::config("cycles overflow the time range"))?,
            );
        let timeline = gcl
            .timeline(from, to)
            .map_err(|e| CliError::Internal(anyhow::anyhow!(e.to_string())))?;
        let mut csv = String::from("time_ns,mask\n");
        for (t, mask) in timeline {
            csv.push_str(&format!("{},{:#010b}\n", t.as_ns(), mask));
        }
        config::write_file(&out, &format!("gates_{}.csv", port.file_stem()), &csv)?;
        written += 1;
    }
    println!("wrote {written} gate timeline(s) to {}", out.display());
    Ok(())
}
