//! A deployable schedule: release offsets, per-port gate programs, and the
//! per-instance windows the synthesizer reserved for each stream.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::gcl::GateControlList;
use crate::model::stream::{StreamId, StreamSpec};
use crate::model::topology::PortId;
use crate::time::TimeNs;

/// One reserved gate window: stream instance `instance` of `stream_id` is
/// expected to traverse `port` inside `[open, close)`.
///
/// `open`/`close` are offsets from instant zero within the first hyperperiod;
/// the window repeats every hyperperiod.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateWindow {
    pub stream_id: StreamId,
    pub instance: u64,
    pub port: PortId,
    pub traffic_class: u8,
    pub open: TimeNs,
    pub close: TimeNs,
}

impl GateWindow {
    pub fn width(&self) -> TimeNs {
        self.close - self.open
    }

    /// Absolute `[open, close)` of this window's `occurrence`-th repetition.
    pub fn absolute(
        &self,
        instant_zero: TimeNs,
        hyperperiod: TimeNs,
        occurrence: u64,
    ) -> (TimeNs, TimeNs) {
        let shift = TimeNs::from_ns(hyperperiod.as_ns() * occurrence as i64);
        (
            instant_zero + self.open + shift,
            instant_zero + self.close + shift,
        )
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("no gate control list for port {0} on the path of stream {1}")]
    MissingPort(PortId, StreamId),
    #[error("stream {0} has no release offset")]
    MissingOffset(StreamId),
    #[error("stream {0}: release offset {1} not below its period")]
    OffsetTooLarge(StreamId, TimeNs),
}

/// Full schedule for a stream set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub instant_zero: TimeNs,
    /// Cycle length shared by every gate program in the schedule.
    pub hyperperiod: TimeNs,
    /// Per-stream release offsets, added to `instant_zero + k * period`.
    pub offsets: BTreeMap<StreamId, TimeNs>,
    /// Gate program per egress port.
    pub gcls: BTreeMap<PortId, GateControlList>,
    /// Reserved windows, empty for all-open schedules.
    #[serde(default)]
    pub windows: Vec<GateWindow>,
}

impl Schedule {
    /// An all-gates-open schedule covering the egress ports of `streams`,
    /// used for characterization runs.
    pub fn always_open(streams: &[StreamSpec], instant_zero: TimeNs, cycle: TimeNs) -> Schedule {
        let mut gcls = BTreeMap::new();
        let mut offsets = BTreeMap::new();
        for s in streams {
            offsets.insert(s.id, TimeNs::ZERO);
            for port in s.egress_ports() {
                gcls.entry(port)
                    .or_insert_with(|| GateControlList::always_open(instant_zero, cycle));
            }
        }
        Schedule {
            instant_zero,
            hyperperiod: cycle,
            offsets,
            gcls,
            windows: Vec::new(),
        }
    }

    /// Check that the schedule covers every stream: an offset below the
    /// period and a gate program on every path port.
    pub fn validate_against(&self, streams: &[StreamSpec]) -> Result<(), ScheduleError> {
        for s in streams {
            let offset = self
                .offsets
                .get(&s.id)
                .ok_or(ScheduleError::MissingOffset(s.id))?;
            if *offset >= s.period || offset.is_negative() {
                return Err(ScheduleError::OffsetTooLarge(s.id, *offset));
            }
            for port in s.egress_ports() {
                if !self.gcls.contains_key(&port) {
                    return Err(ScheduleError::MissingPort(port, s.id));
                }
            }
        }
        Ok(())
    }

    /// The window reserved for instance `instance` of `stream` on `port`.
    pub fn window_for(
        &self,
        stream: StreamId,
        instance: u64,
        port: &PortId,
    ) -> Option<&GateWindow> {
        self.windows
            .iter()
            .find(|w| w.stream_id == stream && w.instance == instance && &w.port == port)
    }

    pub fn windows_on<'a>(&'a self, port: &'a PortId) -> impl Iterator<Item = &'a GateWindow> + 'a {
        self.windows.iter().filter(move |w| &w.port == port)
    }

    /// Stable content hash used to pair traces with the schedule that
    /// produced them.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schedule serializes");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}
