//! Input loading and shared flag plumbing.

use std::fs;
use std::path::{Path, PathBuf};

use tsnsim::engine::{EngineError, FaultSpec, PlatformProfile, ProbeConfig, ProbeMethod};
use tsnsim::model::{validate_streams, validate_topology, Schedule, StreamSpec, Topology};
use tsnsim::time::{parse_duration, TimeNs};
use tsnsim::trace::TraceSet;

use crate::error::CliError;

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid {what} file {}: {e}", path.display())))
}

pub fn load_topology(path: &Path) -> Result<Topology, CliError> {
    let topo: Topology = parse_json(path, "topology")?;
    let report = validate_topology(&topo);
    if !report.is_ok() {
        return Err(CliError::config(format!(
            "topology {}: {report}",
            path.display()
        )));
    }
    Ok(topo)
}

pub fn load_streams(
    path: &Path,
    topology: &Topology,
    relax_deadline: bool,
) -> Result<Vec<StreamSpec>, CliError> {
    let mut streams: Vec<StreamSpec> = parse_json(path, "streams")?;
    for s in &mut streams {
        s.resolve_path(topology)
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    validate_streams(&streams, topology, relax_deadline)
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(streams)
}

pub fn load_schedule(path: &Path) -> Result<Schedule, CliError> {
    parse_json(path, "schedule")
}

pub fn load_traces(path: &Path) -> Result<TraceSet, CliError> {
    parse_json(path, "traces")
}

/// A preset name (`C1`, `C2`, `C3`, `C3-alloc1..3`) or a path to a custom
/// latency-model JSON file of the same shape as the presets.
pub fn load_profile(name_or_path: &str) -> Result<PlatformProfile, CliError> {
    if let Some(p) = PlatformProfile::by_name(name_or_path) {
        return Ok(p);
    }
    let path = PathBuf::from(name_or_path);
    if path.exists() {
        let profile: PlatformProfile = parse_json(&path, "latency model")?;
        profile
            .model
            .validate()
            .map_err(|e| CliError::config(format!("latency model {name_or_path}: {e}")))?;
        return Ok(profile);
    }
    Err(CliError::config(format!(
        "unknown profile {name_or_path:?}: expected one of {:?} or a latency-model file",
        PlatformProfile::PRESET_NAMES
    )))
}

pub fn parse_time_flag(value: &str, flag: &str) -> Result<TimeNs, CliError> {
    let t = parse_duration(value).map_err(|e| CliError::config(format!("--{flag}: {e}")))?;
    if t.is_negative() {
        return Err(CliError::config(format!("--{flag} must be non-negative")));
    }
    Ok(t)
}

/// Probe configuration from the command line: optional method overrides for
/// the bridge and listener NIC points, optional bridge-probe disable.
pub fn build_probes(
    bridge_method: Option<&str>,
    t4_method: Option<&str>,
    no_bridge_probes: bool,
) -> Result<ProbeConfig, CliError> {
    let mut probes = ProbeConfig::default();
    if let Some(m) = bridge_method {
        let method = ProbeMethod::parse(m)
            .ok_or_else(|| CliError::config(format!("unknown method {m:?}")))?;
        probes.t2.method = method;
        probes.t3.method = method;
    }
    if let Some(m) = t4_method {
        let method = ProbeMethod::parse(m)
            .ok_or_else(|| CliError::config(format!("unknown method {m:?}")))?;
        probes.t4.method = method;
    }
    if no_bridge_probes {
        probes.t2.enabled = false;
        probes.t3.enabled = false;
    }
    probes
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(probes)
}

/// `stream:seq:delay` -> fault spec, e.g. `0:3:2ms`.
pub fn parse_fault(value: &str) -> Result<FaultSpec, CliError> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "--fault expects stream:seq:delay, got {value:?}"
        )));
    }
    let stream_id = parts[0]
        .parse()
        .map_err(|_| CliError::config(format!("bad fault stream id {:?}", parts[0])))?;
    let seq = parts[1]
        .parse()
        .map_err(|_| CliError::config(format!("bad fault seq {:?}", parts[1])))?;
    let extra_delay = parse_time_flag(parts[2], "fault")?;
    Ok(FaultSpec {
        stream_id,
        seq,
        extra_delay,
    })
}

/// Engine failures caused by user inputs map to configuration errors;
/// anything else is an internal error.
pub fn engine_error(e: EngineError) -> CliError {
    match e {
        EngineError::Tas(_) | EngineError::Gcl(_) => CliError::Internal(anyhow::anyhow!(e)),
        other => CliError::config(other.to_string()),
    }
}

/// Output directory: the flag wins, then `TSNSIM_OUT_DIR`, then `.`.
pub fn resolve_out_dir(flag: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = match flag {
        Some(d) => d.to_path_buf(),
        None => std::env::var_os("TSNSIM_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn write_json<T: serde::Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(anyhow::anyhow!("serializing {name}: {e}")))?;
    text.push('\n');
    write_file(dir, name, &text)
}
