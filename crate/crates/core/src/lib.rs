//! Deterministic discrete-event simulation and profiling toolkit for
//! 802.1Qbv time-aware networks.
//!
//! The pipeline mirrors how a software-emulated TSN deployment is brought
//! up: define a [`model::Topology`] and a set of periodic
//! [`model::StreamSpec`]s, characterize the platform's latency and intrinsic
//! jitter ([`engine::characterize`]), synthesize a gate schedule from the
//! measured parameters ([`scheduler::synthesize`]), replay it through the
//! event-driven simulator ([`engine::run`]) and validate deadlines and gate
//! pass-through against the trace ([`scheduler::validate_against_trace`]).
//!
//! All time is integer nanoseconds and every run is a pure function of its
//! inputs, seed included.

pub mod engine;
pub mod model;
pub mod profiler;
pub mod scheduler;
pub mod tas;
pub mod time;
pub mod trace;

pub use engine::{
    characterize, run, run_seeds, CharacterizationReport, Distribution, EngineError, FaultSpec,
    LatencyModel, PlatformProfile, ProbeConfig, ProbeMethod, SimInput, TsPoint,
};
pub use model::{
    hyperperiod, route, transmission_time, validate_topology, Frame, GateControlList, GateWindow,
    GclEntry, LinkSpec, NodeId, PortId, Schedule, StreamId, StreamSpec, Topology,
};
pub use profiler::{
    jitter, latencies, pass_through, summarize, JitterStats, LatencyFigure, PassThroughRow,
    ProfilerError, StatSummary,
};
pub use scheduler::{
    check_schedule, synthesize, validate_against_trace, FeasibilityReport, NetworkParams,
    SchedulerError, TraceValidation,
};
pub use tas::{EgressPort, TasError};
pub use time::TimeNs;
pub use trace::{TimestampRecord, TraceSet};
