//! Per-run measurement artifacts: timestamp records, port transmission
//! events and run metadata, plus the canonical CSV export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::engine::probe::{ProbeConfig, ProbeMethod, TsPoint};
use crate::model::stream::StreamId;
use crate::model::topology::PortId;
use crate::time::TimeNs;

/// The five timestamps of one frame, where recorded.
///
/// Points left `None` were disabled in the probe configuration (or do not
/// exist on the frame's path, e.g. T3 on a single-bridge route).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimestampRecord {
    pub stream_id: StreamId,
    pub seq: u64,
    /// Scheduled release instant, kept for talker-error accounting.
    pub release: TimeNs,
    pub t1: Option<TimeNs>,
    pub t2: Option<TimeNs>,
    pub t3: Option<TimeNs>,
    pub t4: Option<TimeNs>,
    pub t5: Option<TimeNs>,
    /// Method used at each recorded point.
    #[serde(default)]
    pub methods: BTreeMap<TsPoint, ProbeMethod>,
}

impl TimestampRecord {
    pub fn get(&self, point: TsPoint) -> Option<TimeNs> {
        match point {
            TsPoint::T1 => self.t1,
            TsPoint::T2 => self.t2,
            TsPoint::T3 => self.t3,
            TsPoint::T4 => self.t4,
            TsPoint::T5 => self.t5,
        }
    }

    pub fn set(&mut self, point: TsPoint, t: TimeNs, method: ProbeMethod) {
        let slot = match point {
            TsPoint::T1 => &mut self.t1,
            TsPoint::T2 => &mut self.t2,
            TsPoint::T3 => &mut self.t3,
            TsPoint::T4 => &mut self.t4,
            TsPoint::T5 => &mut self.t5,
        };
        *slot = Some(t);
        self.methods.insert(point, method);
    }

    /// Present points are non-decreasing in point order.
    pub fn is_monotonic(&self) -> bool {
        let mut last = TimeNs::from_ns(i64::MIN);
        for p in TsPoint::ALL {
            if let Some(t) = self.get(p) {
                if t < last {
                    return false;
                }
                last = t;
            }
        }
        true
    }
}

/// One committed transmission on an egress port.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortEvent {
    pub stream_id: StreamId,
    pub seq: u64,
    pub start: TimeNs,
    pub finish: TimeNs,
    /// Absolute `[open, close)` of the gate window reserved for this frame,
    /// when the schedule carries reservations.
    pub window: Option<(TimeNs, TimeNs)>,
}

/// Run parameters and frame accounting, exported next to the trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub profile: String,
    pub probes: ProbeConfig,
    pub schedule_fingerprint: String,
    pub instant_zero: TimeNs,
    pub duration: TimeNs,
    pub frames_generated: u64,
    pub frames_delivered: u64,
    pub frames_in_flight: u64,
}

/// Everything one simulation run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    /// One record per delivered frame, ordered by (stream, seq).
    pub records: Vec<TimestampRecord>,
    /// Transmission events per port, in start order.
    pub port_events: BTreeMap<PortId, Vec<PortEvent>>,
    pub meta: RunMeta,
}

pub const TRACE_CSV_HEADER: &str = "stream_id,seq,t1_ns,t2_ns,t3_ns,t4_ns,t5_ns,\
send_l_ns,br1_l_ns,br2_l_ns,arr_l_ns,e2e_ns,e2e_nic_ns";

fn opt(v: Option<TimeNs>) -> String {
    v.map(|t| t.as_ns().to_string()).unwrap_or_default()
}

fn diff(b: Option<TimeNs>, a: Option<TimeNs>) -> Option<TimeNs> {
    Some(b? - a?)
}

impl TraceSet {
    /// Canonical trace CSV: one row per delivered frame, stable ordering,
    /// empty cells for disabled points and underivable figures.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TRACE_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let row = [
                r.stream_id.to_string(),
                r.seq.to_string(),
                opt(r.t1),
                opt(r.t2),
                opt(r.t3),
                opt(r.t4),
                opt(r.t5),
                opt(diff(r.t2, r.t1)),
                opt(diff(r.t3, r.t2)),
                opt(diff(r.t4, r.t3)),
                opt(diff(r.t5, r.t4)),
                opt(diff(r.t5, r.t1)),
                opt(diff(r.t4, r.t1)),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Gate pass-through rows for one port as CSV
    /// (stream, seq, open_offset_ns, complete_offset_ns, width_ns).
    pub fn port_events_for(&self, port: &PortId) -> Option<&[PortEvent]> {
        self.port_events.get(port).map(Vec::as_slice)
    }
}
