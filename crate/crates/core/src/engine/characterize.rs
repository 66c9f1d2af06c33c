//! Characterization runs: measure a profile's latencies and intrinsic
//! jitter on a fixed talker -> bridge -> bridge -> listener chain with all
//! gates open.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::distribution::{sample_at, Distribution};
use crate::engine::probe::ProbeConfig;
use crate::engine::profile::PlatformProfile;
use crate::engine::run::{run_with_releases, EngineError, ReleasePlan, SimInput};
use crate::model::schedule::Schedule;
use crate::model::stream::{transmission_time, StreamSpec};
use crate::model::topology::{LinkSpec, Topology};
use crate::model::GIGABIT;
use crate::profiler::{self, estimate_intrinsic_jitter, figure_series, LatencyFigure, StatSummary};
use crate::time::TimeNs;
use crate::trace::TraceSet;

/// Closed-loop comparison of a measured median against the value implied by
/// the injected model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationCheck {
    pub figure: LatencyFigure,
    pub expected_median: TimeNs,
    pub measured_median: TimeNs,
    pub tolerance: TimeNs,
    pub pass: bool,
}

/// Everything a characterization run measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    pub profile: String,
    pub n_frames: u64,
    pub figures: BTreeMap<LatencyFigure, StatSummary>,
    /// Largest observed difference between scheduled release and send
    /// timestamp.
    pub talker_error_max: TimeNs,
    /// Observed latency range per probed bridge, in path order.
    pub bridge_ranges: Vec<TimeNs>,
    /// Range of the end-to-end NIC latency after subtracting the bridge
    /// figures.
    pub residual_range: TimeNs,
    /// Set when fewer than two frames make jitter figures meaningless.
    pub insufficient_samples: bool,
    /// Conservative margin the synthesizer should absorb; `None` below 100
    /// frames.
    pub intrinsic_jitter_estimate: Option<TimeNs>,
    pub calibration: Vec<CalibrationCheck>,
}

/// The fixed characterization chain.
pub fn chain_topology() -> Topology {
    let mut t = Topology::default();
    t.hosts.insert("talker".into());
    t.hosts.insert("listener".into());
    t.bridges.insert("bridge1".into());
    t.bridges.insert("bridge2".into());
    t.links = vec![
        LinkSpec::new("talker", "bridge1", GIGABIT),
        LinkSpec::new("bridge1", "bridge2", GIGABIT),
        LinkSpec::new("bridge2", "listener", GIGABIT),
    ];
    t
}

/// Release spacing law: uniform between 1 and 2 ms keeps successive frames
/// well clear of each other at every preset.
fn spacing_law() -> Distribution {
    Distribution::uniform(TimeNs::from_us(1_500), TimeNs::from_us(500))
}

/// Deploy `n_frames` frames with randomized spacing across the chain, all
/// gates open, and summarize every latency figure.
pub fn characterize(
    profile: &PlatformProfile,
    probes: &ProbeConfig,
    n_frames: u64,
    seed: u64,
) -> Result<(CharacterizationReport, TraceSet), EngineError> {
    characterize_sized(profile, probes, n_frames, seed, 1500)
}

/// [`characterize`] with an explicit frame size.
pub fn characterize_sized(
    profile: &PlatformProfile,
    probes: &ProbeConfig,
    n_frames: u64,
    seed: u64,
    frame_size: u32,
) -> Result<(CharacterizationReport, TraceSet), EngineError> {
    if n_frames == 0 {
        return Err(EngineError::BadArgument("frames must be >= 1".into()));
    }
    let topology = chain_topology();

    let mut releases = Vec::with_capacity(n_frames as usize);
    let spacing = spacing_law();
    let mut at = TimeNs::ZERO;
    for seq in 0..n_frames {
        releases.push(ReleasePlan {
            stream_idx: 0,
            seq,
            at,
        });
        at += sample_at(&spacing, seed, "talker", "spacing", 0, seq);
    }
    let horizon = at + TimeNs::from_ms(10);

    // One synthetic stream spanning the whole campaign.
    let span = horizon.max(TimeNs::from_ms(1));
    let stream = StreamSpec {
        id: 0,
        talker: "talker".into(),
        listener: "listener".into(),
        period: span,
        deadline: span,
        jitter_bound: span,
        frame_size,
        traffic_class: 3,
        path: vec![
            "talker".into(),
            "bridge1".into(),
            "bridge2".into(),
            "listener".into(),
        ],
    };
    let streams = vec![stream];
    let schedule = Schedule::always_open(&streams, TimeNs::ZERO, TimeNs::from_ms(1));

    let input = SimInput {
        topology: &topology,
        streams: &streams,
        schedule: &schedule,
        model: &profile.model,
        probes,
        duration: horizon,
        seed,
        profile_name: &profile.name,
        fault: None,
    };
    let traces = run_with_releases(&input, releases, horizon)?;
    debug_assert_eq!(traces.meta.frames_delivered, n_frames);

    let report = build_report(profile, probes, n_frames, frame_size, &traces)?;
    Ok((report, traces))
}

fn build_report(
    profile: &PlatformProfile,
    probes: &ProbeConfig,
    n_frames: u64,
    frame_size: u32,
    traces: &TraceSet,
) -> Result<CharacterizationReport, EngineError> {
    let series =
        figure_series(&traces.records).map_err(|e| EngineError::BadArgument(e.to_string()))?;
    let mut figures = BTreeMap::new();
    for (figure, values) in &series {
        figures.insert(
            *figure,
            profiler::summarize(values).expect("non-empty figure series"),
        );
    }

    let talker_error_max = traces
        .records
        .iter()
        .filter_map(|r| r.t1.map(|t1| t1 - r.release))
        .max()
        .unwrap_or(TimeNs::ZERO);

    let mut bridge_ranges = Vec::new();
    for figure in [LatencyFigure::Br1L, LatencyFigure::Br2L] {
        if let Some(s) = figures.get(&figure) {
            bridge_ranges.push(s.range());
        }
    }

    // Residual: e2e_nic minus the probed bridge spans, per frame.
    let mut residual = Vec::new();
    for r in &traces.records {
        let l = profiler::latencies(r).expect("engine emits monotonic records");
        if let Some(mut v) = l.get(&LatencyFigure::E2eNic).copied() {
            for f in [LatencyFigure::Br1L, LatencyFigure::Br2L] {
                if let Some(b) = l.get(&f) {
                    v -= *b;
                }
            }
            residual.push(v);
        }
    }
    let residual_range = profiler::jitter(&residual).range;

    let tx = transmission_time(frame_size, GIGABIT);
    let model = &profile.model;
    let mut calibration = Vec::new();
    let mut expect = |figure: LatencyFigure, expected: TimeNs| {
        if let Some(s) = figures.get(&figure) {
            let tolerance = TimeNs::from_ns((expected.as_ns() / 20).max(2_000));
            let diff = (s.median - expected).as_ns().abs();
            calibration.push(CalibrationCheck {
                figure,
                expected_median: expected,
                measured_median: s.median,
                tolerance,
                pass: diff <= tolerance.as_ns(),
            });
        }
    };
    let overhead = |enabled: bool, method| {
        if enabled {
            model.probe_overhead_for(method).median
        } else {
            TimeNs::ZERO
        }
    };
    let send_med = model.talker_send.median + tx;
    let br1_med =
        model.bridge_residence.median + overhead(probes.t2.enabled, probes.t2.method) + tx;
    let br2_med =
        model.bridge_residence.median + overhead(probes.t3.enabled, probes.t3.method) + tx;
    expect(LatencyFigure::SendL, send_med);
    expect(LatencyFigure::Br1L, br1_med);
    expect(LatencyFigure::Br2L, br2_med);
    expect(LatencyFigure::E2eNic, send_med + br1_med + br2_med);

    let mut report = CharacterizationReport {
        profile: profile.name.clone(),
        n_frames,
        figures,
        talker_error_max,
        bridge_ranges,
        residual_range,
        insufficient_samples: n_frames < 2,
        intrinsic_jitter_estimate: None,
        calibration,
    };
    report.intrinsic_jitter_estimate = estimate_intrinsic_jitter(&report).ok();
    Ok(report)
}
