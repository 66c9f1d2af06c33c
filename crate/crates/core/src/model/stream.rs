//! Periodic time-aware streams and the frames they emit.

use serde::{Deserialize, Serialize};

use crate::model::topology::{route, NodeId, PortId, Topology};
use crate::time::TimeNs;

/// Stream identifier (small integer, unique per configuration).
pub type StreamId = u32;

/// A periodic unidirectional stream from a talker host to a listener host.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub id: StreamId,
    pub talker: NodeId,
    pub listener: NodeId,
    pub period: TimeNs,
    pub deadline: TimeNs,
    pub jitter_bound: TimeNs,
    /// Frame size in bytes, Ethernet overhead included.
    pub frame_size: u32,
    /// Traffic class 0..=7, carried by every frame of the stream.
    pub traffic_class: u8,
    /// Node sequence from talker to listener. May be left empty in input
    /// files; [`StreamSpec::resolve_path`] fills it by shortest-hop routing.
    #[serde(default)]
    pub path: Vec<NodeId>,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum StreamError {
    #[error("stream {0}: deadline must satisfy 0 < deadline <= period (use the relaxed-deadline flag to lift the upper bound)")]
    BadDeadline(StreamId),
    #[error("stream {0}: period must be positive")]
    BadPeriod(StreamId),
    #[error("stream {0}: frame size {1} outside [64, 1522] bytes")]
    BadFrameSize(StreamId, u32),
    #[error("stream {0}: traffic class {1} outside [0, 7]")]
    BadTrafficClass(StreamId, u8),
    #[error("stream {0}: jitter bound must be non-negative")]
    BadJitterBound(StreamId),
    #[error("stream {0}: {1}")]
    BadPath(StreamId, String),
    #[error("stream {0}: no route: {1}")]
    NoRoute(StreamId, String),
    #[error("duplicate stream id {0}")]
    DuplicateId(StreamId),
}

impl StreamSpec {
    /// Fill in `path` by shortest-hop routing when the input left it empty.
    pub fn resolve_path(&mut self, topology: &Topology) -> Result<(), StreamError> {
        if self.path.is_empty() {
            self.path = route(topology, &self.talker, &self.listener)
                .map_err(|e| StreamError::NoRoute(self.id, e.to_string()))?;
        }
        Ok(())
    }

    /// Check all per-stream invariants against a topology.
    pub fn validate(&self, topology: &Topology, relax_deadline: bool) -> Result<(), StreamError> {
        if self.period <= TimeNs::ZERO {
            return Err(StreamError::BadPeriod(self.id));
        }
        if self.deadline <= TimeNs::ZERO || (!relax_deadline && self.deadline > self.period) {
            return Err(StreamError::BadDeadline(self.id));
        }
        if self.jitter_bound.is_negative() {
            return Err(StreamError::BadJitterBound(self.id));
        }
        if !(64..=1522).contains(&self.frame_size) {
            return Err(StreamError::BadFrameSize(self.id, self.frame_size));
        }
        if self.traffic_class > 7 {
            return Err(StreamError::BadTrafficClass(self.id, self.traffic_class));
        }
        if self.path.len() < 2 {
            return Err(StreamError::BadPath(self.id, "path too short".into()));
        }
        if self.path.first() != Some(&self.talker) {
            return Err(StreamError::BadPath(
                self.id,
                "path does not start at the talker".into(),
            ));
        }
        if self.path.last() != Some(&self.listener) {
            return Err(StreamError::BadPath(
                self.id,
                "path does not end at the listener".into(),
            ));
        }
        for pair in self.path.windows(2) {
            if topology.link_between(&pair[0], &pair[1]).is_none() {
                return Err(StreamError::BadPath(
                    self.id,
                    format!("no link between {:?} and {:?}", pair[0], pair[1]),
                ));
            }
        }
        // Frames are forwarded at bridges and delivered at the first host
        // they reach, so paths must be simple and bridge-internal.
        let mut seen = std::collections::BTreeSet::new();
        for node in &self.path {
            if !seen.insert(node) {
                return Err(StreamError::BadPath(
                    self.id,
                    format!("path visits {node:?} twice"),
                ));
            }
        }
        for node in &self.path[1..self.path.len() - 1] {
            if !topology.is_bridge(node) {
                return Err(StreamError::BadPath(
                    self.id,
                    format!("intermediate node {node:?} is not a bridge"),
                ));
            }
        }
        Ok(())
    }

    /// Egress ports traversed in path order (one per hop, listener excluded).
    pub fn egress_ports(&self) -> Vec<PortId> {
        self.path
            .windows(2)
            .map(|pair| PortId::new(pair[0].clone(), pair[1].clone()))
            .collect()
    }

    /// Number of frame instances released per `hyperperiod`.
    pub fn instances_per_hyperperiod(&self, hyperperiod: TimeNs) -> u64 {
        debug_assert!(hyperperiod.as_ns() % self.period.as_ns() == 0);
        (hyperperiod.as_ns() / self.period.as_ns()) as u64
    }
}

/// Validate a stream set as a whole (unique ids, per-stream invariants).
pub fn validate_streams(
    streams: &[StreamSpec],
    topology: &Topology,
    relax_deadline: bool,
) -> Result<(), StreamError> {
    let mut ids = std::collections::BTreeSet::new();
    for s in streams {
        if !ids.insert(s.id) {
            return Err(StreamError::DuplicateId(s.id));
        }
        s.validate(topology, relax_deadline)?;
    }
    Ok(())
}

/// One frame instance of a stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub stream_id: StreamId,
    /// Per-stream counter from 0, strictly increasing.
    pub seq: u64,
    pub size: u32,
    pub traffic_class: u8,
    /// Scheduled release instant (before any talker delay).
    pub release_time: TimeNs,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PeriodError {
    #[error("stream set is empty")]
    Empty,
    #[error("all periods must be positive")]
    NonPositive,
    #[error("hyperperiod overflows 64-bit nanoseconds")]
    Overflow,
}

/// Least common multiple of all stream periods.
pub fn hyperperiod(streams: &[StreamSpec]) -> Result<TimeNs, PeriodError> {
    if streams.is_empty() {
        return Err(PeriodError::Empty);
    }
    let mut acc: u64 = 1;
    for s in streams {
        if s.period <= TimeNs::ZERO {
            return Err(PeriodError::NonPositive);
        }
        let p = s.period.as_ns() as u64;
        let g = num_integer::gcd(acc, p);
        let wide = (acc / g) as u128 * p as u128;
        if wide > i64::MAX as u128 {
            return Err(PeriodError::Overflow);
        }
        acc = wide as u64;
    }
    Ok(TimeNs::from_ns(acc as i64))
}

/// Time to clock `size` bytes onto a link of `rate` bits per second,
/// rounded up to whole nanoseconds.
pub fn transmission_time(size: u32, rate: u64) -> TimeNs {
    assert!(size > 0 && rate > 0, "size and rate must be positive");
    let bits = size as u128 * 8 * 1_000_000_000;
    TimeNs::from_ns(bits.div_ceil(rate as u128) as i64)
}
