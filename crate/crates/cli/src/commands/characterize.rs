//! `tsnsim characterize`: run the all-gates-open measurement campaign and
//! derive latency summaries plus the intrinsic-jitter estimate.

use std::path::PathBuf;

use tsnsim::engine::characterize_sized;
use tsnsim::profiler::summary_csv;
use tsnsim::time::format_us;

use crate::config::{self, build_probes, load_profile, resolve_out_dir};
use crate::error::{CliError, CliResult};

#[derive(clap::Args)]
pub struct Args {
    /// Platform preset (C1, C2, C3, C3-alloc1..3) or a latency-model JSON file.
    #[arg(long, default_value = "C2")]
    profile: String,
    /// Number of frames to deploy across the two-bridge chain.
    #[arg(long, default_value_t = 1000)]
    frames: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Frame size in bytes (Ethernet overhead included).
    #[arg(long, default_value_t = 1500)]
    frame_size: u32,
    /// Timestamping method at both bridge points: M2.2 or M3.
    #[arg(long)]
    bridge_method: Option<String>,
    /// Timestamping method at the listener NIC: M2.1 or M3.
    #[arg(long)]
    t4_method: Option<String>,
    /// Switch the bridge probes (T2/T3) off entirely.
    #[arg(long)]
    no_bridge_probes: bool,
    /// Output directory (default: $TSNSIM_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &Args) -> CliResult {
    if args.frames == 0 {
        return Err(CliError::config("frames must be >= 1"));
    }
    if !(64..=1522).contains(&args.frame_size) {
        return Err(CliError::config("frame size must lie in [64, 1522] bytes"));
    }
    let profile = load_profile(&args.profile)?;
    let probes = build_probes(
        args.bridge_method.as_deref(),
        args.t4_method.as_deref(),
        args.no_bridge_probes,
    )?;
    let out = resolve_out_dir(args.out.as_deref())?;

    let (report, traces) =
        characterize_sized(&profile, &probes, args.frames, args.seed, args.frame_size)
            .map_err(config::engine_error)?;

    config::write_file(&out, "characterize_trace.csv", &traces.to_csv())?;
    config::write_file(
        &out,
        "characterize_summary.csv",
        &summary_csv(&report.figures),
    )?;
    config::write_json(&out, "characterize_report.json", &report)?;
    config::write_json(&out, "characterize_trace.meta.json", &traces.meta)?;

    println!(
        "characterized {} with {} frames (seed {})",
        report.profile, report.n_frames, args.seed
    );
    for (figure, s) in &report.figures {
        println!(
            "  {figure:>8}: median {:>12}  iqr {:>12}  range {:>12}",
            format_us(s.median),
            format_us(s.iqr()),
            format_us(s.range())
        );
    }
    println!("  talker error max: {}", format_us(report.talker_error_max));
    for check in &report.calibration {
        println!(
            "  calibration {}: expected {} measured {} -> {}",
            check.figure,
            format_us(check.expected_median),
            format_us(check.measured_median),
            if check.pass { "pass" } else { "FAIL" }
        );
    }
    match report.intrinsic_jitter_estimate {
        Some(est) => println!("intrinsic jitter estimate: {}", format_us(est)),
        None => println!(
            "intrinsic jitter estimate: unavailable ({} frames < 100)",
            report.n_frames
        ),
    }
    if report.insufficient_samples {
        println!("warning: insufficient samples, jitter figures are zero");
    }
    println!("wrote {}", out.display());
    Ok(())
}
