//! Domain types: topology, streams, frames, gate programs and schedules.

pub mod gcl;
pub mod schedule;
pub mod stream;
pub mod topology;

pub use gcl::{GateControlList, GclEntry, GclError, OpenRun};
pub use schedule::{GateWindow, Schedule, ScheduleError};
pub use stream::{
    hyperperiod, transmission_time, validate_streams, Frame, PeriodError, StreamError, StreamId,
    StreamSpec,
};
pub use topology::{
    route, validate_topology, LinkSpec, NodeId, PortId, RouteError, Topology, TopologyReport,
    TopologyViolation,
};

use crate::time::TimeNs;

/// Gigabit line rate, the default for emulated links.
pub const GIGABIT: u64 = 1_000_000_000;

/// The bundled four-host, two-bridge network: h1 and h2 feed B1, B1 feeds
/// B2, and h3 and h4 hang off B2. All links run at 1 Gb/s with zero
/// propagation delay.
pub fn use_case_topology() -> Topology {
    let mut t = Topology::default();
    for h in ["h1", "h2", "h3", "h4"] {
        t.hosts.insert(h.into());
    }
    for b in ["B1", "B2"] {
        t.bridges.insert(b.into());
    }
    t.links = vec![
        LinkSpec::new("h1", "B1", GIGABIT),
        LinkSpec::new("h2", "B1", GIGABIT),
        LinkSpec::new("B1", "B2", GIGABIT),
        LinkSpec::new("h4", "B2", GIGABIT),
        LinkSpec::new("B2", "h3", GIGABIT),
    ];
    t
}

/// The bundled stream set: three periodic streams converging on h3, with
/// periods and deadlines of 10/20/30 ms and jitter bounds one tenth of the
/// deadline. Paths resolve over [`use_case_topology`].
pub fn use_case_streams() -> Vec<StreamSpec> {
    let topo = use_case_topology();
    let mut streams = vec![
        StreamSpec {
            id: 0,
            talker: "h1".into(),
            listener: "h3".into(),
            period: TimeNs::from_ms(10),
            deadline: TimeNs::from_ms(10),
            jitter_bound: TimeNs::from_ms(1),
            frame_size: 1500,
            traffic_class: 3,
            path: vec![],
        },
        StreamSpec {
            id: 1,
            talker: "h2".into(),
            listener: "h3".into(),
            period: TimeNs::from_ms(20),
            deadline: TimeNs::from_ms(20),
            jitter_bound: TimeNs::from_ms(2),
            frame_size: 1500,
            traffic_class: 2,
            path: vec![],
        },
        StreamSpec {
            id: 2,
            talker: "h4".into(),
            listener: "h3".into(),
            period: TimeNs::from_ms(30),
            deadline: TimeNs::from_ms(30),
            jitter_bound: TimeNs::from_ms(3),
            frame_size: 1500,
            traffic_class: 1,
            path: vec![],
        },
    ];
    for s in &mut streams {
        s.resolve_path(&topo).expect("bundled paths resolve");
    }
    streams
}
