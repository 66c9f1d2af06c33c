//! Latency figures and statistics derived from timestamp records.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::characterize::CharacterizationReport;
use crate::model::schedule::Schedule;
use crate::model::stream::StreamId;
use crate::model::topology::PortId;
use crate::time::TimeNs;
use crate::trace::{TimestampRecord, TraceSet};

/// The six derived latency figures.
///
/// `SendL` spans talker send to first-bridge arrival, `Br1L`/`Br2L` span
/// consecutive arrivals around each bridge, `ArrL` spans listener NIC to
/// delivery, `E2eNic` is NIC-to-NIC (the figure deadlines are checked
/// against) and `E2e` is process-to-process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LatencyFigure {
    SendL,
    Br1L,
    Br2L,
    ArrL,
    E2e,
    E2eNic,
}

impl LatencyFigure {
    pub const ALL: [LatencyFigure; 6] = [
        LatencyFigure::SendL,
        LatencyFigure::Br1L,
        LatencyFigure::Br2L,
        LatencyFigure::ArrL,
        LatencyFigure::E2e,
        LatencyFigure::E2eNic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LatencyFigure::SendL => "sendL",
            LatencyFigure::Br1L => "br1L",
            LatencyFigure::Br2L => "br2L",
            LatencyFigure::ArrL => "arrL",
            LatencyFigure::E2e => "e2e",
            LatencyFigure::E2eNic => "e2e_nic",
        }
    }

    pub fn parse(s: &str) -> Option<LatencyFigure> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl fmt::Display for LatencyFigure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for LatencyFigure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LatencyFigure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LatencyFigure::parse(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown latency figure {s:?}")))
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ProfilerError {
    #[error("empty series")]
    EmptySeries,
    #[error("record (stream {stream}, seq {seq}): non-monotonic timestamps")]
    NonMonotonic { stream: StreamId, seq: u64 },
    #[error("insufficient samples: need {needed}, have {got}")]
    InsufficientSamples { needed: u64, got: u64 },
    #[error("unknown port {0}")]
    UnknownPort(PortId),
}

/// Latency figures derivable from one record; figures whose points are
/// missing are omitted.
pub fn latencies(r: &TimestampRecord) -> Result<BTreeMap<LatencyFigure, TimeNs>, ProfilerError> {
    let mut out = BTreeMap::new();
    let pairs = [
        (LatencyFigure::SendL, r.t2, r.t1),
        (LatencyFigure::Br1L, r.t3, r.t2),
        (LatencyFigure::Br2L, r.t4, r.t3),
        (LatencyFigure::ArrL, r.t5, r.t4),
        (LatencyFigure::E2e, r.t5, r.t1),
        (LatencyFigure::E2eNic, r.t4, r.t1),
    ];
    for (figure, later, earlier) in pairs {
        if let (Some(b), Some(a)) = (later, earlier) {
            let d = b - a;
            if d.is_negative() {
                return Err(ProfilerError::NonMonotonic {
                    stream: r.stream_id,
                    seq: r.seq,
                });
            }
            out.insert(figure, d);
        }
    }
    Ok(out)
}

/// Per-figure series over a record slice, in record order.
pub fn figure_series(
    records: &[TimestampRecord],
) -> Result<BTreeMap<LatencyFigure, Vec<TimeNs>>, ProfilerError> {
    let mut out: BTreeMap<LatencyFigure, Vec<TimeNs>> = BTreeMap::new();
    for r in records {
        for (figure, value) in latencies(r)? {
            out.entry(figure).or_default().push(value);
        }
    }
    Ok(out)
}

/// Box-plot style summary of one series.
///
/// Quartiles use linear interpolation between closest ranks, rounded to the
/// nearest nanosecond (ties away from zero); outliers are exactly the values
/// strictly outside `[q1 - 1.5*IQR, q3 + 1.5*IQR]`, with the fences taken on
/// the rounded quartiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: u64,
    pub min: TimeNs,
    pub q1: TimeNs,
    pub median: TimeNs,
    pub q3: TimeNs,
    pub max: TimeNs,
    pub mean: TimeNs,
    pub stddev: TimeNs,
    pub outliers: Vec<TimeNs>,
}

impl StatSummary {
    pub fn iqr(&self) -> TimeNs {
        self.q3 - self.q1
    }

    pub fn range(&self) -> TimeNs {
        self.max - self.min
    }
}

fn quantile_sorted(sorted: &[TimeNs], p: f64) -> TimeNs {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let a = sorted[lo].as_ns() as f64;
    let b = sorted[(lo + 1).min(n - 1)].as_ns() as f64;
    TimeNs::from_ns((a + frac * (b - a)).round() as i64)
}

pub fn summarize(series: &[TimeNs]) -> Result<StatSummary, ProfilerError> {
    if series.is_empty() {
        return Err(ProfilerError::EmptySeries);
    }
    let mut sorted = series.to_vec();
    sorted.sort();
    let n = sorted.len();
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);

    let sum: i128 = sorted.iter().map(|t| t.as_ns() as i128).sum();
    let mean = TimeNs::from_ns(((2 * sum + n as i128) / (2 * n as i128)) as i64);
    let stddev = if n < 2 {
        TimeNs::ZERO
    } else {
        let mean_f = sum as f64 / n as f64;
        let ssq: f64 = sorted
            .iter()
            .map(|t| {
                let d = t.as_ns() as f64 - mean_f;
                d * d
            })
            .sum();
        TimeNs::from_ns((ssq / (n as f64 - 1.0)).sqrt().round() as i64)
    };

    // Fences at q1 - 1.5*IQR and q3 + 1.5*IQR, compared in half-nanosecond
    // units so the arithmetic stays exact.
    let lo2 = 5 * q1.as_ns() as i128 - 3 * q3.as_ns() as i128;
    let hi2 = 5 * q3.as_ns() as i128 - 3 * q1.as_ns() as i128;
    let outliers = sorted
        .iter()
        .copied()
        .filter(|t| {
            let t2 = 2 * t.as_ns() as i128;
            t2 < lo2 || t2 > hi2
        })
        .collect();

    Ok(StatSummary {
        count: n as u64,
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[n - 1],
        mean,
        stddev,
        outliers,
    })
}

/// The three jitter statistics of a series. Below two samples everything is
/// zero and the result is flagged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JitterStats {
    pub range: TimeNs,
    pub iqr: TimeNs,
    pub stddev: TimeNs,
    pub insufficient_samples: bool,
}

pub fn jitter(series: &[TimeNs]) -> JitterStats {
    if series.len() < 2 {
        return JitterStats {
            range: TimeNs::ZERO,
            iqr: TimeNs::ZERO,
            stddev: TimeNs::ZERO,
            insufficient_samples: true,
        };
    }
    let summary = summarize(series).expect("series is non-empty");
    JitterStats {
        range: summary.range(),
        iqr: summary.iqr(),
        stddev: summary.stddev,
        insufficient_samples: false,
    }
}

/// Conservative intrinsic-jitter bound from a characterization report:
/// talker error bound, plus each bridge's latency range, plus the residual
/// end-to-end range, rounded up to the next 100 us.
pub fn estimate_intrinsic_jitter(report: &CharacterizationReport) -> Result<TimeNs, ProfilerError> {
    if report.n_frames < 100 {
        return Err(ProfilerError::InsufficientSamples {
            needed: 100,
            got: report.n_frames,
        });
    }
    Ok(compose_intrinsic_jitter(
        report.talker_error_max,
        &report.bridge_ranges,
        report.residual_range,
    ))
}

/// The composition rule behind [`estimate_intrinsic_jitter`], split out so
/// its monotonicity can be tested directly.
pub fn compose_intrinsic_jitter(
    talker_error: TimeNs,
    bridge_ranges: &[TimeNs],
    residual_range: TimeNs,
) -> TimeNs {
    let mut sum = talker_error + residual_range;
    for r in bridge_ranges {
        sum += *r;
    }
    sum.ceil_to(100 * crate::time::MICROSECOND)
}

/// One frame's transit through its reserved gate window on a port, as
/// offsets from the window opening.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassThroughRow {
    pub stream_id: StreamId,
    pub seq: u64,
    pub open_offset: TimeNs,
    pub complete_offset: TimeNs,
    pub width: TimeNs,
    /// Transmission started at or after the opening and completed within
    /// the window.
    pub within: bool,
}

/// Pass-through offsets for every reserved-window transmission on `port`.
/// Transmissions without a reservation (all-open schedules, best-effort
/// traffic) are skipped.
pub fn pass_through(
    traces: &TraceSet,
    schedule: &Schedule,
    port: &PortId,
) -> Result<Vec<PassThroughRow>, ProfilerError> {
    let known = schedule.gcls.contains_key(port) || traces.port_events.contains_key(port);
    if !known {
        return Err(ProfilerError::UnknownPort(port.clone()));
    }
    let mut rows = Vec::new();
    for ev in traces
        .port_events
        .get(port)
        .map(Vec::as_slice)
        .unwrap_or(&[])
    {
        let Some((open, close)) = ev.window else {
            continue;
        };
        rows.push(PassThroughRow {
            stream_id: ev.stream_id,
            seq: ev.seq,
            open_offset: ev.start - open,
            complete_offset: ev.finish - open,
            width: close - open,
            within: ev.start >= open && ev.finish <= close,
        });
    }
    Ok(rows)
}

pub const SUMMARY_CSV_HEADER: &str =
    "figure,count,min_ns,q1_ns,median_ns,q3_ns,max_ns,mean_ns,stddev_ns,n_outliers";

/// Per-figure summary CSV used by reports and the characterization output.
pub fn summary_csv(figures: &BTreeMap<LatencyFigure, StatSummary>) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for (figure, s) in figures {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            figure,
            s.count,
            s.min.as_ns(),
            s.q1.as_ns(),
            s.median.as_ns(),
            s.q3.as_ns(),
            s.max.as_ns(),
            s.mean.as_ns(),
            s.stddev.as_ns(),
            s.outliers.len()
        ));
    }
    out
}

pub const PASS_THROUGH_CSV_HEADER: &str = "stream,seq,open_offset_ns,complete_offset_ns,width_ns";

pub fn pass_through_csv(rows: &[PassThroughRow]) -> String {
    let mut out = String::from(PASS_THROUGH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.stream_id,
            r.seq,
            r.open_offset.as_ns(),
            r.complete_offset.as_ns(),
            r.width.as_ns()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::probe::{ProbeMethod, TsPoint};

    fn us(v: i64) -> TimeNs {
        TimeNs::from_us(v)
    }

    fn full_record() -> TimestampRecord {
        let mut r = TimestampRecord {
            stream_id: 0,
            seq: 0,
            release: TimeNs::ZERO,
            ..Default::default()
        };
        r.set(TsPoint::T1, us(0), ProbeMethod::M11);
        r.set(TsPoint::T2, us(30), ProbeMethod::M22);
        r.set(TsPoint::T3, us(240), ProbeMethod::M22);
        r.set(TsPoint::T4, us(450), ProbeMethod::M21);
        r.set(TsPoint::T5, us(470), ProbeMethod::M11);
        r
    }

    #[test]
    fn latency_decomposition_matches_definitions() {
        let l = latencies(&full_record()).unwrap();
        assert_eq!(l[&LatencyFigure::E2eNic], us(450));
        assert_eq!(l[&LatencyFigure::Br1L], us(210));
        assert_eq!(l[&LatencyFigure::Br2L], us(210));
        assert_eq!(l[&LatencyFigure::SendL], us(30));
        assert_eq!(l[&LatencyFigure::ArrL], us(20));
        assert_eq!(l[&LatencyFigure::E2e], us(470));
    }

    #[test]
    fn equal_t1_t4_gives_zero_e2e_nic() {
        let mut r = full_record();
        r.t2 = None;
        r.t3 = None;
        r.t4 = r.t1;
        r.t5 = r.t1;
        let l = latencies(&r).unwrap();
        assert_eq!(l[&LatencyFigure::E2eNic], TimeNs::ZERO);
    }

    #[test]
    fn missing_t3_omits_bridge_figures_only() {
        let mut r = full_record();
        r.t3 = None;
        let l = latencies(&r).unwrap();
        assert!(!l.contains_key(&LatencyFigure::Br1L));
        assert!(!l.contains_key(&LatencyFigure::Br2L));
        assert_eq!(l[&LatencyFigure::E2eNic], us(450));
    }

    #[test]
    fn negative_difference_is_an_error() {
        let mut r = full_record();
        r.t2 = Some(us(500));
        assert_eq!(
            latencies(&r),
            Err(ProfilerError::NonMonotonic { stream: 0, seq: 0 })
        );
    }

    #[test]
    fn summarize_simple_series() {
        let s = summarize(&[1, 2, 3, 4, 5].map(TimeNs::from_ns)).unwrap();
        assert_eq!(s.median, TimeNs::from_ns(3));
        assert_eq!(s.q1, TimeNs::from_ns(2));
        assert_eq!(s.q3, TimeNs::from_ns(4));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn summarize_flags_outlier_beyond_fence() {
        let s = summarize(&[1, 2, 3, 4, 100].map(TimeNs::from_ns)).unwrap();
        assert_eq!(s.q1, TimeNs::from_ns(2));
        assert_eq!(s.q3, TimeNs::from_ns(4));
        // Upper fence is q3 + 1.5*IQR = 7.
        assert_eq!(s.outliers, vec![TimeNs::from_ns(100)]);
    }

    #[test]
    fn summarize_singleton_collapses() {
        let s = summarize(&[TimeNs::from_ns(7)]).unwrap();
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max),
            (
                TimeNs::from_ns(7),
                TimeNs::from_ns(7),
                TimeNs::from_ns(7),
                TimeNs::from_ns(7),
                TimeNs::from_ns(7)
            )
        );
        assert_eq!(s.stddev, TimeNs::ZERO);
    }

    #[test]
    fn summarize_rejects_empty_series() {
        assert_eq!(summarize(&[]), Err(ProfilerError::EmptySeries));
    }

    #[test]
    fn jitter_statistics() {
        let j = jitter(&[us(100), us(110), us(90)]);
        assert_eq!(j.range, us(20));
        assert!(!j.insufficient_samples);

        let constant = jitter(&[us(5), us(5), us(5)]);
        assert_eq!(constant.range, TimeNs::ZERO);
        assert_eq!(constant.iqr, TimeNs::ZERO);
        assert_eq!(constant.stddev, TimeNs::ZERO);

        let single = jitter(&[us(5)]);
        assert!(single.insufficient_samples);
        assert_eq!(single.range, TimeNs::ZERO);
    }

    #[test]
    fn pass_through_offsets_are_window_relative() {
        use crate::engine::probe::ProbeConfig;
        use crate::model::schedule::{GateWindow, Schedule};
        use crate::model::PortId;
        use crate::trace::{PortEvent, RunMeta, TraceSet};
        use std::collections::BTreeMap;

        let port = PortId::new("B1", "B2");
        let schedule = Schedule {
            instant_zero: TimeNs::ZERO,
            hyperperiod: TimeNs::from_ms(10),
            offsets: BTreeMap::from([(0, TimeNs::ZERO)]),
            gcls: BTreeMap::new(),
            windows: vec![GateWindow {
                stream_id: 0,
                instance: 0,
                port: port.clone(),
                traffic_class: 3,
                open: us(100),
                close: us(612),
            }],
        };
        let window = Some((us(100), us(612)));
        let mk_event = |seq, start_us: i64| PortEvent {
            stream_id: 0,
            seq,
            start: us(start_us),
            finish: us(start_us + 12),
            window,
        };
        let traces = TraceSet {
            records: vec![],
            // Frame 0 starts 40us into the 512us window, frame 1 exactly at
            // its opening, frame 2 is a fault-delayed straggler.
            port_events: BTreeMap::from([(
                port.clone(),
                vec![mk_event(0, 140), mk_event(1, 100), mk_event(2, 700)],
            )]),
            meta: RunMeta {
                seed: 0,
                profile: "test".into(),
                probes: ProbeConfig::default(),
                schedule_fingerprint: schedule.fingerprint(),
                instant_zero: TimeNs::ZERO,
                duration: TimeNs::from_ms(10),
                frames_generated: 3,
                frames_delivered: 3,
                frames_in_flight: 0,
            },
        };
        let rows = pass_through(&traces, &schedule, &port).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].open_offset, us(40));
        assert_eq!(rows[0].complete_offset, us(52));
        assert_eq!(rows[0].width, us(512));
        assert!(rows[0].within);
        assert_eq!(rows[1].open_offset, TimeNs::ZERO);
        assert!(rows[1].within);
        assert!(rows[2].complete_offset > rows[2].width);
        assert!(!rows[2].within);

        let err = pass_through(&traces, &schedule, &PortId::new("h9", "B1")).unwrap_err();
        assert!(matches!(err, ProfilerError::UnknownPort(_)));
    }

    #[test]
    fn estimate_requires_a_hundred_frames() {
        use crate::engine::characterize::CharacterizationReport;
        let report = CharacterizationReport {
            profile: "C2".into(),
            n_frames: 50,
            figures: Default::default(),
            talker_error_max: TimeNs::ZERO,
            bridge_ranges: vec![],
            residual_range: TimeNs::ZERO,
            insufficient_samples: false,
            intrinsic_jitter_estimate: None,
            calibration: vec![],
        };
        assert_eq!(
            estimate_intrinsic_jitter(&report),
            Err(ProfilerError::InsufficientSamples {
                needed: 100,
                got: 50
            })
        );
    }

    #[test]
    fn intrinsic_jitter_composition_rounds_up() {
        // Talker error + two bridge ranges + residual, up to the next 100us.
        let est = compose_intrinsic_jitter(TimeNs::from_ns(80), &[us(200), us(200)], us(10));
        assert_eq!(est, us(500));
        assert_eq!(
            compose_intrinsic_jitter(TimeNs::ZERO, &[], TimeNs::ZERO),
            TimeNs::ZERO
        );
        assert_eq!(
            compose_intrinsic_jitter(TimeNs::ZERO, &[us(50)], TimeNs::ZERO),
            us(100)
        );
    }
}
