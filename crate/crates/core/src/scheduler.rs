//! Gate-schedule synthesis and verification.
//!
//! The synthesizer walks streams in rate-monotonic order and reserves, for
//! every frame instance and every hop, a gate window of width
//! `transmission_time + 2 * intrinsic_jitter`, placed first-fit as soon as
//! possible after the frame's earliest arrival at that hop. The analytic
//! checker, not the synthesizer, is the source of truth: anything the
//! synthesizer emits must pass [`check_schedule`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::gcl::{GateControlList, GclEntry};
use crate::model::schedule::{GateWindow, Schedule};
use crate::model::stream::{
    hyperperiod, transmission_time, validate_streams, StreamId, StreamSpec,
};
use crate::model::topology::{PortId, Topology};
use crate::profiler::{latencies, LatencyFigure};
use crate::time::{TimeNs, MICROSECOND};
use crate::trace::TraceSet;

/// Measured network parameters the synthesizer must absorb.
///
/// Link rates and propagation delays live on the topology's links; these two
/// are the characterization outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Upper bound used for per-hop arrival planning (bridge residence).
    pub bridge_latency_bound: TimeNs,
    /// Total timing slack reserved on each side of a transmission.
    pub intrinsic_jitter: TimeNs,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            bridge_latency_bound: TimeNs::from_us(200),
            intrinsic_jitter: TimeNs::from_us(500),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("infeasible: stream {stream} instance {instance}: {reason}")]
    Infeasible {
        stream: StreamId,
        instance: u64,
        reason: String,
    },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("trace was produced under schedule {found}, expected {expected}")]
    TraceMismatch { expected: String, found: String },
}

/// Gate boundaries are quantized to 1 us.
pub const GCL_QUANTUM: i64 = MICROSECOND;
/// Minimum separation between two reserved windows on the same port, so
/// windows never fuse into one contiguous open run.
const WINDOW_GAP: TimeNs = TimeNs(GCL_QUANTUM);

/// Synthesize release offsets and per-port gate programs for `streams`.
pub fn synthesize(
    streams: &[StreamSpec],
    topology: &Topology,
    params: &NetworkParams,
) -> Result<Schedule, SchedulerError> {
    validate_streams(streams, topology, false)
        .map_err(|e| SchedulerError::BadInput(e.to_string()))?;
    if params.bridge_latency_bound.is_negative() || params.intrinsic_jitter.is_negative() {
        return Err(SchedulerError::BadInput(
            "network parameters must be non-negative".into(),
        ));
    }
    let h = hyperperiod(streams).map_err(|e| SchedulerError::BadInput(e.to_string()))?;
    let jitter_margin = params.intrinsic_jitter.ceil_to(GCL_QUANTUM);

    // Two streams of the same class sharing an egress port would share one
    // FIFO queue, so frames could drain through each other's windows in
    // arrival order. Window reservations cannot be kept apart in that
    // regime; demand distinct classes per port instead.
    let mut class_claims: BTreeMap<(PortId, u8), StreamId> = BTreeMap::new();
    for s in streams {
        for port in s.egress_ports() {
            match class_claims.entry((port.clone(), s.traffic_class)) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(s.id);
                }
                std::collections::btree_map::Entry::Occupied(e) if *e.get() != s.id => {
                    return Err(SchedulerError::Infeasible {
                        stream: s.id,
                        instance: 0,
                        reason: format!(
                            "traffic class {} on port {port} is already claimed by stream {}; \
                             frames of one class share a FIFO queue, so per-stream windows \
                             cannot be kept apart",
                            s.traffic_class,
                            e.get()
                        ),
                    });
                }
                _ => {}
            }
        }
    }

    // Rate-monotonic processing order; stream id breaks period ties.
    let mut order: Vec<usize> = (0..streams.len()).collect();
    order.sort_by_key(|&i| (streams[i].period, streams[i].id));

    let mut occupied: BTreeMap<PortId, Vec<(TimeNs, TimeNs)>> = BTreeMap::new();
    let mut windows: Vec<GateWindow> = Vec::new();

    for idx in order {
        let s = &streams[idx];
        let ports = s.egress_ports();
        let instances = s.instances_per_hyperperiod(h);
        for k in 0..instances {
            let release = TimeNs::from_ns(s.period.as_ns() * k as i64);
            let mut earliest = release;
            for (hop, port) in ports.iter().enumerate() {
                let link = topology
                    .link_between(&port.node, &port.next)
                    .expect("validated path is link-consistent");
                let tx = transmission_time(s.frame_size, link.rate);
                let width = tx.ceil_to(GCL_QUANTUM) + jitter_margin + jitter_margin;
                let slots = occupied.entry(port.clone()).or_default();
                let open = place_first_fit(slots, earliest.ceil_to(GCL_QUANTUM), width);
                let close = open + width;

                let is_last = hop + 1 == ports.len();
                let completion_bound = if is_last {
                    close + link.propagation_delay
                } else {
                    close
                };
                if completion_bound - release > s.deadline {
                    return Err(SchedulerError::Infeasible {
                        stream: s.id,
                        instance: k,
                        reason: format!(
                            "window on {port} closes {} after release, past deadline {}",
                            completion_bound - release,
                            s.deadline
                        ),
                    });
                }

                let at = slots.partition_point(|&(o, _)| o < open);
                slots.insert(at, (open, close));
                windows.push(GateWindow {
                    stream_id: s.id,
                    instance: k,
                    port: port.clone(),
                    traffic_class: s.traffic_class,
                    open,
                    close,
                });

                // Earliest arrival at the next hop: this window's start plus
                // transmission, residence bound and propagation.
                earliest = open + tx + params.bridge_latency_bound + link.propagation_delay;
            }
        }
    }

    let instant_zero = TimeNs::ZERO;
    let mut gcls = BTreeMap::new();
    for (port, slots) in &occupied {
        let scheduled_mask: u8 = windows
            .iter()
            .filter(|w| &w.port == port)
            .fold(0, |m, w| m | (1 << w.traffic_class));
        gcls.insert(
            port.clone(),
            build_gcl(instant_zero, h, slots, &windows, port, scheduled_mask),
        );
    }

    let offsets = streams.iter().map(|s| (s.id, TimeNs::ZERO)).collect();
    Ok(Schedule {
        instant_zero,
        hyperperiod: h,
        offsets,
        gcls,
        windows,
    })
}

/// First position at or after `candidate` where `[start, start+width)` fits
/// between the sorted `slots` with [`WINDOW_GAP`] on both sides.
fn place_first_fit(slots: &[(TimeNs, TimeNs)], candidate: TimeNs, width: TimeNs) -> TimeNs {
    let mut start = candidate;
    for &(open, close) in slots {
        if start + width + WINDOW_GAP <= open {
            break;
        }
        start = start.max(close + WINDOW_GAP);
    }
    start
}

/// Gate program for one port: reserved windows open exactly one scheduled
/// class; every gap opens only the classes no stream claimed on this port.
fn build_gcl(
    base: TimeNs,
    cycle: TimeNs,
    slots: &[(TimeNs, TimeNs)],
    windows: &[GateWindow],
    port: &PortId,
    scheduled_mask: u8,
) -> GateControlList {
    let best_effort = !scheduled_mask;
    let mut port_windows: Vec<&GateWindow> = windows.iter().filter(|w| &w.port == port).collect();
    port_windows.sort_by_key(|w| w.open);
    debug_assert_eq!(port_windows.len(), slots.len());

    let mut entries = Vec::new();
    let mut t = TimeNs::ZERO;
    for w in port_windows {
        if w.open > t {
            entries.push(GclEntry::new(best_effort, w.open - t));
        }
        entries.push(GclEntry::new(1 << w.traffic_class, w.close - w.open));
        t = w.close;
    }
    if t < cycle {
        entries.push(GclEntry::new(best_effort, cycle - t));
    }
    GateControlList::new(base, cycle, entries).expect("windows partition the cycle")
}

/// One analytic check failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckViolation {
    OverlappingWindows {
        port: PortId,
        first: (StreamId, u64),
        second: (StreamId, u64),
        overlap_from: TimeNs,
        overlap_to: TimeNs,
    },
    DeadlineExceeded {
        stream: StreamId,
        instance: u64,
        worst_case: TimeNs,
        deadline: TimeNs,
    },
    WindowTooNarrow {
        stream: StreamId,
        instance: u64,
        port: PortId,
        width: TimeNs,
        required: TimeNs,
    },
    MissingWindow {
        stream: StreamId,
        instance: u64,
        port: PortId,
    },
}

impl fmt::Display for CheckViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckViolation::OverlappingWindows {
                port,
                first,
                second,
                overlap_from,
                overlap_to,
            } => write!(
                f,
                "port {port}: windows of (stream {}, #{}) and (stream {}, #{}) overlap in [{overlap_from}, {overlap_to})",
                first.0, first.1, second.0, second.1
            ),
            CheckViolation::DeadlineExceeded {
                stream,
                instance,
                worst_case,
                deadline,
            } => write!(
                f,
                "stream {stream} #{instance}: worst-case latency {worst_case} exceeds deadline {deadline}"
            ),
            CheckViolation::WindowTooNarrow {
                stream,
                instance,
                port,
                width,
                required,
            } => write!(
                f,
                "stream {stream} #{instance} on {port}: width {width} below required {required}"
            ),
            CheckViolation::MissingWindow {
                stream,
                instance,
                port,
            } => write!(f, "stream {stream} #{instance}: no window on {port}"),
        }
    }
}

/// Outcome of [`check_schedule`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<CheckViolation>,
    /// Analytic worst-case end-to-end latency per stream.
    pub stream_worst_case: BTreeMap<StreamId, TimeNs>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_feasible() {
            writeln!(f, "schedule feasible")?;
        } else {
            writeln!(
                f,
                "schedule INFEASIBLE: {} violation(s)",
                self.violations.len()
            )?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
        }
        for (stream, wc) in &self.stream_worst_case {
            writeln!(
                f,
                "  stream {stream}: worst-case {}",
                crate::time::format_us(*wc)
            )?;
        }
        Ok(())
    }
}

/// Analytic verification of a schedule: exclusive windows never overlap,
/// every window is wide enough for its transmission plus jitter margin, and
/// worst-case completion meets every deadline.
pub fn check_schedule(
    schedule: &Schedule,
    streams: &[StreamSpec],
    topology: &Topology,
    params: &NetworkParams,
) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();

    // (a) pairwise window overlap per port.
    let mut by_port: BTreeMap<&PortId, Vec<&GateWindow>> = BTreeMap::new();
    for w in &schedule.windows {
        by_port.entry(&w.port).or_default().push(w);
    }
    for (port, mut ws) in by_port {
        ws.sort_by_key(|w| w.open);
        for pair in ws.windows(2) {
            if pair[1].open < pair[0].close {
                report.violations.push(CheckViolation::OverlappingWindows {
                    port: port.clone(),
                    first: (pair[0].stream_id, pair[0].instance),
                    second: (pair[1].stream_id, pair[1].instance),
                    overlap_from: pair[1].open,
                    overlap_to: pair[0].close.min(pair[1].close),
                });
            }
        }
    }

    // (b) worst-case deadline and (c) width per stream instance.
    for s in streams {
        let offset = schedule.offsets.get(&s.id).copied().unwrap_or(TimeNs::ZERO);
        let ports = s.egress_ports();
        let instances = if schedule.hyperperiod.as_ns() % s.period.as_ns() == 0 {
            s.instances_per_hyperperiod(schedule.hyperperiod)
        } else {
            0
        };
        let mut stream_worst = TimeNs::ZERO;
        for k in 0..instances {
            let release = offset + TimeNs::from_ns(s.period.as_ns() * k as i64);
            let mut last_completion = None;
            for (hop, port) in ports.iter().enumerate() {
                let Some(w) = schedule.window_for(s.id, k, port) else {
                    report.violations.push(CheckViolation::MissingWindow {
                        stream: s.id,
                        instance: k,
                        port: port.clone(),
                    });
                    continue;
                };
                let link = topology
                    .link_between(&port.node, &port.next)
                    .expect("validated path is link-consistent");
                let tx = transmission_time(s.frame_size, link.rate);
                let required = tx + params.intrinsic_jitter + params.intrinsic_jitter;
                if w.width() < required {
                    report.violations.push(CheckViolation::WindowTooNarrow {
                        stream: s.id,
                        instance: k,
                        port: port.clone(),
                        width: w.width(),
                        required,
                    });
                }
                if hop + 1 == ports.len() {
                    last_completion = Some(w.close + link.propagation_delay);
                }
            }
            if let Some(completion) = last_completion {
                let worst = completion - release;
                stream_worst = stream_worst.max(worst);
                if worst > s.deadline {
                    report.violations.push(CheckViolation::DeadlineExceeded {
                        stream: s.id,
                        instance: k,
                        worst_case: worst,
                        deadline: s.deadline,
                    });
                }
            }
        }
        report.stream_worst_case.insert(s.id, stream_worst);
    }
    report
}

/// One trace-level validation failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceViolation {
    DeadlineMiss {
        stream: StreamId,
        seq: u64,
        e2e_nic: TimeNs,
        deadline: TimeNs,
    },
    OutsideWindow {
        port: PortId,
        stream: StreamId,
        seq: u64,
        start: TimeNs,
        finish: TimeNs,
        window_open: TimeNs,
        window_close: TimeNs,
    },
    JitterExceeded {
        stream: StreamId,
        observed: TimeNs,
        bound: TimeNs,
    },
    BadRecord {
        stream: StreamId,
        seq: u64,
        reason: String,
    },
}

impl fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceViolation::DeadlineMiss {
                stream,
                seq,
                e2e_nic,
                deadline,
            } => write!(
                f,
                "stream {stream} seq {seq}: e2e.nic {} exceeds deadline {}",
                crate::time::format_us(*e2e_nic),
                crate::time::format_us(*deadline)
            ),
            TraceViolation::OutsideWindow {
                port,
                stream,
                seq,
                start,
                finish,
                window_open,
                window_close,
            } => write!(
                f,
                "port {port}: stream {stream} seq {seq} transmitted [{start}, {finish}) outside window [{window_open}, {window_close})"
            ),
            TraceViolation::JitterExceeded {
                stream,
                observed,
                bound,
            } => write!(
                f,
                "stream {stream}: observed jitter {} exceeds bound {}",
                crate::time::format_us(*observed),
                crate::time::format_us(*bound)
            ),
            TraceViolation::BadRecord { stream, seq, reason } => {
                write!(f, "stream {stream} seq {seq}: {reason}")
            }
        }
    }
}

/// Per-stream validation outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamValidation {
    pub stream_id: StreamId,
    pub frames: u64,
    pub worst_e2e_nic: Option<TimeNs>,
    /// Deadline minus worst observed e2e.nic.
    pub margin: Option<TimeNs>,
    pub jitter_range: TimeNs,
    pub pass: bool,
}

/// Outcome of [`validate_against_trace`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceValidation {
    pub per_stream: Vec<StreamValidation>,
    pub violations: Vec<TraceViolation>,
}

impl TraceValidation {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TraceValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.per_stream {
            let status = if s.pass { "pass" } else { "FAIL" };
            write!(f, "stream {}: {status}, {} frame(s)", s.stream_id, s.frames)?;
            if let (Some(worst), Some(margin)) = (s.worst_e2e_nic, s.margin) {
                write!(
                    f,
                    ", worst e2e.nic {} (margin {})",
                    crate::time::format_us(worst),
                    crate::time::format_us(margin)
                )?;
            }
            writeln!(
                f,
                ", jitter range {}",
                crate::time::format_us(s.jitter_range)
            )?;
        }
        if !self.violations.is_empty() {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
        }
        Ok(())
    }
}

/// Validate a finished run against the schedule that produced it: deadlines
/// met frame by frame, every transmission inside its reserved window, and
/// per-stream jitter within bounds.
pub fn validate_against_trace(
    schedule: &Schedule,
    streams: &[StreamSpec],
    traces: &TraceSet,
) -> Result<TraceValidation, SchedulerError> {
    let expected = schedule.fingerprint();
    if traces.meta.schedule_fingerprint != expected {
        return Err(SchedulerError::TraceMismatch {
            expected,
            found: traces.meta.schedule_fingerprint.clone(),
        });
    }

    let mut violations = Vec::new();

    // (i) per-frame deadline on e2e.nic.
    let mut per_stream_series: BTreeMap<StreamId, Vec<TimeNs>> = BTreeMap::new();
    for r in &traces.records {
        let stream = streams.iter().find(|s| s.id == r.stream_id);
        let Some(stream) = stream else {
            violations.push(TraceViolation::BadRecord {
                stream: r.stream_id,
                seq: r.seq,
                reason: "record references an unknown stream".into(),
            });
            continue;
        };
        match latencies(r) {
            Err(e) => violations.push(TraceViolation::BadRecord {
                stream: r.stream_id,
                seq: r.seq,
                reason: e.to_string(),
            }),
            Ok(l) => match l.get(&LatencyFigure::E2eNic) {
                None => violations.push(TraceViolation::BadRecord {
                    stream: r.stream_id,
                    seq: r.seq,
                    reason: "e2e.nic not derivable (T1 or T4 missing)".into(),
                }),
                Some(&e2e_nic) => {
                    per_stream_series
                        .entry(r.stream_id)
                        .or_default()
                        .push(e2e_nic);
                    if e2e_nic > stream.deadline {
                        violations.push(TraceViolation::DeadlineMiss {
                            stream: r.stream_id,
                            seq: r.seq,
                            e2e_nic,
                            deadline: stream.deadline,
                        });
                    }
                }
            },
        }
    }

    // (ii) transmissions inside their reserved windows.
    for (port, events) in &traces.port_events {
        for ev in events {
            if let Some((open, close)) = ev.window {
                if ev.start < open || ev.finish > close {
                    violations.push(TraceViolation::OutsideWindow {
                        port: port.clone(),
                        stream: ev.stream_id,
                        seq: ev.seq,
                        start: ev.start,
                        finish: ev.finish,
                        window_open: open,
                        window_close: close,
                    });
                }
            }
        }
    }

    // (iii) per-stream observed jitter against the configured bound.
    let mut per_stream = Vec::new();
    for s in streams {
        let series = per_stream_series.remove(&s.id).unwrap_or_default();
        let range = crate::profiler::jitter(&series).range;
        if range > s.jitter_bound {
            violations.push(TraceViolation::JitterExceeded {
                stream: s.id,
                observed: range,
                bound: s.jitter_bound,
            });
        }
        let worst = series.iter().copied().max();
        let pass = !violations.iter().any(|v| match v {
            TraceViolation::DeadlineMiss { stream, .. } => *stream == s.id,
            TraceViolation::OutsideWindow { stream, .. } => *stream == s.id,
            TraceViolation::JitterExceeded { stream, .. } => *stream == s.id,
            TraceViolation::BadRecord { stream, .. } => *stream == s.id,
        });
        per_stream.push(StreamValidation {
            stream_id: s.id,
            frames: series.len() as u64,
            worst_e2e_nic: worst,
            margin: worst.map(|w| s.deadline - w),
            jitter_range: range,
            pass,
        });
    }

    Ok(TraceValidation {
        per_stream,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{use_case_streams, use_case_topology, LinkSpec, Topology, GIGABIT};

    fn params() -> NetworkParams {
        NetworkParams::default()
    }

    #[test]
    fn use_case_schedule_is_feasible_with_expected_window_counts() {
        let topo = use_case_topology();
        let streams = use_case_streams();
        let schedule = synthesize(&streams, &topo, &params()).unwrap();
        assert_eq!(schedule.hyperperiod, TimeNs::from_ms(60));

        // Windows per stream per port: 6 for stream 0, 3 for stream 1, 2 for
        // stream 2, on each of their hops.
        for (stream, hops, expected) in [(0u32, 3usize, 6usize), (1, 3, 3), (2, 2, 2)] {
            let count = schedule
                .windows
                .iter()
                .filter(|w| w.stream_id == stream)
                .count();
            assert_eq!(count, hops * expected, "stream {stream}");
        }

        let report = check_schedule(&schedule, &streams, &topo, &params());
        assert!(report.is_feasible(), "{report}");
    }

    #[test]
    fn window_bounds_are_microsecond_aligned() {
        let topo = use_case_topology();
        let streams = use_case_streams();
        let schedule = synthesize(&streams, &topo, &params()).unwrap();
        for w in &schedule.windows {
            assert!(w.open.is_multiple_of(GCL_QUANTUM));
            assert!(w.close.is_multiple_of(GCL_QUANTUM));
        }
        for gcl in schedule.gcls.values() {
            assert_eq!(gcl.cycle_time(), schedule.hyperperiod);
        }
    }

    #[test]
    fn masks_carry_one_scheduled_class_at_a_time() {
        let topo = use_case_topology();
        let streams = use_case_streams();
        let schedule = synthesize(&streams, &topo, &params()).unwrap();
        for (port, gcl) in &schedule.gcls {
            let scheduled: u8 = schedule
                .windows_on(port)
                .fold(0, |m, w| m | (1 << w.traffic_class));
            for e in gcl.entries() {
                let bits = (e.gate_mask & scheduled).count_ones();
                assert!(bits <= 1, "port {port}: mask {:#010b}", e.gate_mask);
            }
        }
    }

    #[test]
    fn single_stream_single_hop_degenerate_case() {
        let mut topo = Topology::default();
        topo.hosts.insert("a".into());
        topo.hosts.insert("b".into());
        topo.links.push(LinkSpec::new("a", "b", GIGABIT));
        let streams = vec![StreamSpec {
            id: 0,
            talker: "a".into(),
            listener: "b".into(),
            period: TimeNs::from_ms(1),
            deadline: TimeNs::from_ms(1),
            jitter_bound: TimeNs::from_ms(1),
            frame_size: 1500,
            traffic_class: 5,
            path: vec!["a".into(), "b".into()],
        }];
        let p = NetworkParams {
            bridge_latency_bound: TimeNs::ZERO,
            intrinsic_jitter: TimeNs::ZERO,
        };
        let schedule = synthesize(&streams, &topo, &p).unwrap();
        assert_eq!(schedule.windows.len(), 1);
        let w = &schedule.windows[0];
        assert_eq!(w.open, TimeNs::ZERO);
        assert_eq!(w.width(), TimeNs::from_us(12));
        assert_eq!(schedule.offsets[&0], TimeNs::ZERO);
        assert!(check_schedule(&schedule, &streams, &topo, &p).is_feasible());
    }

    #[test]
    fn saturated_port_is_infeasible() {
        // Two streams on the same egress port, each needing the entire
        // period for its own transmission.
        let mut topo = Topology::default();
        topo.hosts.insert("a".into());
        topo.hosts.insert("b".into());
        topo.links.push(LinkSpec::new("a", "b", GIGABIT));
        let mk = |id, class| StreamSpec {
            id,
            talker: "a".into(),
            listener: "b".into(),
            period: TimeNs::from_us(12),
            deadline: TimeNs::from_us(12),
            jitter_bound: TimeNs::from_us(12),
            frame_size: 1500,
            traffic_class: class,
            path: vec!["a".into(), "b".into()],
        };
        let streams = vec![mk(0, 5), mk(1, 4)];
        let p = NetworkParams {
            bridge_latency_bound: TimeNs::ZERO,
            intrinsic_jitter: TimeNs::ZERO,
        };
        let err = synthesize(&streams, &topo, &p).unwrap_err();
        assert!(matches!(err, SchedulerError::Infeasible { stream: 1, .. }));

        // Sharing one traffic class on a port is rejected outright: one
        // FIFO queue cannot keep two streams' reservations apart.
        let streams = vec![mk(0, 5), mk(1, 5)];
        let err = synthesize(&streams, &topo, &p).unwrap_err();
        match err {
            SchedulerError::Infeasible { reason, .. } => {
                assert!(reason.contains("FIFO"), "{reason}")
            }
            other => panic!("expected Infeasible, got {other}"),
        }
    }

    #[test]
    fn checker_reports_overlap_and_narrow_windows() {
        let topo = use_case_topology();
        let streams = use_case_streams();
        let mut schedule = synthesize(&streams, &topo, &params()).unwrap();

        // Force an overlap on B1's egress toward B2.
        let port = PortId::new("B1", "B2");
        let w0 = schedule
            .windows
            .iter()
            .position(|w| w.port == port && w.stream_id == 1)
            .unwrap();
        let shadow = schedule
            .windows
            .iter()
            .find(|w| w.port == port && w.stream_id == 0)
            .cloned()
            .unwrap();
        schedule.windows[w0].open = shadow.open + TimeNs::from_us(1);
        schedule.windows[w0].close = shadow.close + TimeNs::from_us(1);
        let report = check_schedule(&schedule, &streams, &topo, &params());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, CheckViolation::OverlappingWindows { .. })));

        // Narrow one window below transmission + margin.
        let mut schedule = synthesize(&streams, &topo, &params()).unwrap();
        schedule.windows[0].close = schedule.windows[0].open + TimeNs::from_us(10);
        let report = check_schedule(&schedule, &streams, &topo, &params());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, CheckViolation::WindowTooNarrow { .. })));
    }
}
