//! The deterministic event loop: periodic frame generation, per-hop dwell
//! sampling, time-aware-shaper ports and timestamp probes.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use crate::engine::distribution::{substream_rng, DistributionError};
use crate::engine::probe::{ProbeConfig, ProbeError, TsPoint};
use crate::engine::profile::LatencyModel;
use crate::model::gcl::GclError;
use crate::model::schedule::{Schedule, ScheduleError};
use crate::model::stream::{hyperperiod, PeriodError, StreamError, StreamId, StreamSpec};
use crate::model::stream::{validate_streams, Frame};
use crate::model::topology::{NodeId, PortId, Topology};
use crate::tas::{EgressPort, TasError};
use crate::time::TimeNs;
use crate::trace::{PortEvent, RunMeta, TimestampRecord, TraceSet};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("schedule does not cover the stream set: {0}")]
    ScheduleIncomplete(#[from] ScheduleError),
    #[error("duration {duration} is shorter than one hyperperiod {hyperperiod}")]
    DurationTooShort {
        duration: TimeNs,
        hyperperiod: TimeNs,
    },
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error(transparent)]
    Model(#[from] DistributionError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error(transparent)]
    Tas(#[from] TasError),
    #[error(transparent)]
    Gcl(#[from] GclError),
    #[error("{0}")]
    BadArgument(String),
}

/// Extra dwell injected at a frame's last bridge, for validation tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultSpec {
    pub stream_id: StreamId,
    pub seq: u64,
    pub extra_delay: TimeNs,
}

/// Borrowed inputs of one simulation run.
#[derive(Clone, Copy)]
pub struct SimInput<'a> {
    pub topology: &'a Topology,
    pub streams: &'a [StreamSpec],
    pub schedule: &'a Schedule,
    pub model: &'a LatencyModel,
    pub probes: &'a ProbeConfig,
    pub duration: TimeNs,
    pub seed: u64,
    pub profile_name: &'a str,
    pub fault: Option<FaultSpec>,
}

/// Run the simulator over `duration` starting at the schedule's instant
/// zero. Frames are released at `instant_zero + offset + k * period`; the
/// trace is a pure function of the inputs, seed included.
pub fn run(input: &SimInput) -> Result<TraceSet, EngineError> {
    validate_streams(input.streams, input.topology, true)?;
    input.model.validate()?;
    input.probes.validate()?;
    input.schedule.validate_against(input.streams)?;
    let h = hyperperiod(input.streams)?;
    if input.duration < h {
        return Err(EngineError::DurationTooShort {
            duration: input.duration,
            hyperperiod: h,
        });
    }

    let iz = input.schedule.instant_zero;
    let mut releases = Vec::new();
    for (idx, s) in input.streams.iter().enumerate() {
        let offset = input.schedule.offsets[&s.id];
        let mut seq = 0u64;
        loop {
            let at = iz + offset + TimeNs::from_ns(s.period.as_ns() * seq as i64);
            if at >= iz + input.duration {
                break;
            }
            releases.push(ReleasePlan {
                stream_idx: idx,
                seq,
                at,
            });
            seq += 1;
        }
    }
    releases.sort_by_key(|r| (r.at, r.stream_idx));

    run_with_releases(input, releases, iz + input.duration)
}

pub(crate) struct ReleasePlan {
    pub stream_idx: usize,
    pub seq: u64,
    pub at: TimeNs,
}

enum Ev {
    Release { stream_idx: usize, seq: u64 },
    Enqueue { port: usize, frame: Frame },
    Kick { port: usize },
    Complete { port: usize },
    Deliver { frame: Frame, t4: TimeNs },
}

struct Item {
    at: TimeNs,
    ord: u64,
    ev: Ev,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.ord == other.ord
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Ties execute in insertion order.
        self.at.cmp(&other.at).then(self.ord.cmp(&other.ord))
    }
}

struct PortRt {
    id: PortId,
    egress: EgressPort,
    busy_until: TimeNs,
    in_tx: Option<Frame>,
    propagation: TimeNs,
    next_node: NodeId,
}

struct StreamRt {
    /// Port index per hop.
    ports: Vec<usize>,
    /// Timestamp point recorded when the frame reaches the n-th bridge on
    /// its path (only the first two bridges carry probes).
    bridge_point: BTreeMap<NodeId, Option<TsPoint>>,
    last_bridge: Option<NodeId>,
    instances_per_hyperperiod: u64,
}

pub(crate) fn run_with_releases(
    input: &SimInput,
    releases: Vec<ReleasePlan>,
    horizon: TimeNs,
) -> Result<TraceSet, EngineError> {
    let schedule = input.schedule;
    let iz = schedule.instant_zero;

    // Port table, ordered by port id for determinism.
    let mut port_index: BTreeMap<PortId, usize> = BTreeMap::new();
    let mut ports: Vec<PortRt> = Vec::new();
    for s in input.streams {
        for pair in s.path.windows(2) {
            let id = PortId::new(pair[0].clone(), pair[1].clone());
            if port_index.contains_key(&id) {
                continue;
            }
            let link = input
                .topology
                .link_between(&pair[0], &pair[1])
                .expect("stream validation checked link consistency");
            let gcl = schedule.gcls[&id].clone();
            port_index.insert(id.clone(), ports.len());
            ports.push(PortRt {
                egress: EgressPort::new(id.clone(), gcl, link.rate),
                id,
                busy_until: iz,
                in_tx: None,
                propagation: link.propagation_delay,
                next_node: pair[1].clone(),
            });
        }
    }

    let stream_rt: Vec<StreamRt> = input
        .streams
        .iter()
        .map(|s| {
            let mut bridge_point = BTreeMap::new();
            let mut bridge_count = 0usize;
            let mut last_bridge = None;
            for node in &s.path[1..] {
                if input.topology.is_bridge(node) {
                    let point = match bridge_count {
                        0 => Some(TsPoint::T2),
                        1 => Some(TsPoint::T3),
                        _ => None,
                    };
                    bridge_point.insert(node.clone(), point);
                    bridge_count += 1;
                    last_bridge = Some(node.clone());
                }
            }
            let per = if schedule.windows.is_empty()
                || schedule.hyperperiod.as_ns() % s.period.as_ns() != 0
            {
                0
            } else {
                s.instances_per_hyperperiod(schedule.hyperperiod)
            };
            StreamRt {
                ports: s.egress_ports().iter().map(|p| port_index[p]).collect(),
                bridge_point,
                last_bridge,
                instances_per_hyperperiod: per,
            }
        })
        .collect();

    let seed = input.seed;
    let mut heap: BinaryHeap<Reverse<Item>> = BinaryHeap::new();
    let mut ord = 0u64;
    let push = |heap: &mut BinaryHeap<Reverse<Item>>, ord: &mut u64, at: TimeNs, ev: Ev| {
        heap.push(Reverse(Item { at, ord: *ord, ev }));
        *ord += 1;
    };

    for r in releases {
        push(
            &mut heap,
            &mut ord,
            r.at,
            Ev::Release {
                stream_idx: r.stream_idx,
                seq: r.seq,
            },
        );
    }

    let mut records: BTreeMap<(StreamId, u64), TimestampRecord> = BTreeMap::new();
    let mut delivered: BTreeSet<(StreamId, u64)> = BTreeSet::new();
    let mut port_events: BTreeMap<PortId, Vec<PortEvent>> = BTreeMap::new();
    let mut generated = 0u64;

    while let Some(Reverse(item)) = heap.pop() {
        if item.at >= horizon {
            heap.push(Reverse(item));
            break;
        }
        let at = item.at;
        match item.ev {
            Ev::Release { stream_idx, seq } => {
                let s = &input.streams[stream_idx];
                generated += 1;
                let err = input.model.talker_sched_error.sample(&mut substream_rng(
                    seed,
                    &s.talker,
                    "sched_error",
                    s.id,
                    seq,
                ));
                let t1 = at + err;
                let mut rec = TimestampRecord {
                    stream_id: s.id,
                    seq,
                    release: at,
                    ..Default::default()
                };
                if input.probes.t1.enabled {
                    rec.set(TsPoint::T1, t1, input.probes.t1.method);
                }
                records.insert((s.id, seq), rec);
                let dwell = input.model.talker_send.sample(&mut substream_rng(
                    seed,
                    &s.talker,
                    "talker_send",
                    s.id,
                    seq,
                ));
                let frame = Frame {
                    stream_id: s.id,
                    seq,
                    size: s.frame_size,
                    traffic_class: s.traffic_class,
                    release_time: at,
                };
                push(
                    &mut heap,
                    &mut ord,
                    t1 + dwell,
                    Ev::Enqueue {
                        port: stream_rt[stream_idx].ports[0],
                        frame,
                    },
                );
            }
            Ev::Enqueue { port, frame } => {
                let rt = &mut ports[port];
                rt.egress.enqueue(frame)?;
                let when = at.max(rt.busy_until);
                push(&mut heap, &mut ord, when, Ev::Kick { port });
            }
            Ev::Kick { port } => {
                let rt = &mut ports[port];
                if at < rt.busy_until {
                    continue;
                }
                debug_assert!(rt.in_tx.is_none(), "completion runs before same-time kicks");
                match rt.egress.peek_next_transmission(at)? {
                    None => {}
                    Some(planned) if planned.start == at => {
                        let frame = rt.egress.commit(planned);
                        rt.busy_until = planned.finish;
                        let stream_idx = input
                            .streams
                            .iter()
                            .position(|s| s.id == frame.stream_id)
                            .expect("frame belongs to a known stream");
                        let window = assigned_window(
                            schedule,
                            &stream_rt[stream_idx],
                            frame.stream_id,
                            frame.seq,
                            &rt.id,
                        );
                        port_events
                            .entry(rt.id.clone())
                            .or_default()
                            .push(PortEvent {
                                stream_id: frame.stream_id,
                                seq: frame.seq,
                                start: planned.start,
                                finish: planned.finish,
                                window,
                            });
                        rt.in_tx = Some(frame);
                        push(&mut heap, &mut ord, planned.finish, Ev::Complete { port });
                    }
                    Some(planned) => {
                        push(&mut heap, &mut ord, planned.start, Ev::Kick { port });
                    }
                }
            }
            Ev::Complete { port } => {
                let (frame, arrival, next_node) = {
                    let rt = &mut ports[port];
                    let frame = rt.in_tx.take().expect("a transmission was in flight");
                    (frame, at + rt.propagation, rt.next_node.clone())
                };
                // The port may transmit again from the completion instant.
                push(&mut heap, &mut ord, at, Ev::Kick { port });

                let stream_idx = input
                    .streams
                    .iter()
                    .position(|s| s.id == frame.stream_id)
                    .expect("frame belongs to a known stream");
                let s = &input.streams[stream_idx];
                let rt = &stream_rt[stream_idx];

                if input.topology.is_bridge(&next_node) {
                    let mut dwell = input.model.bridge_residence.sample(&mut substream_rng(
                        seed,
                        &next_node,
                        "residence",
                        s.id,
                        frame.seq,
                    ));
                    if let Some(Some(point)) = rt.bridge_point.get(&next_node) {
                        let probe = input.probes.point(*point);
                        if probe.enabled {
                            records
                                .get_mut(&(s.id, frame.seq))
                                .expect("record created at release")
                                .set(*point, arrival, probe.method);
                            dwell += input.model.probe_overhead_for(probe.method).sample(
                                &mut substream_rng(
                                    seed,
                                    &next_node,
                                    "probe_overhead",
                                    s.id,
                                    frame.seq,
                                ),
                            );
                        }
                    }
                    if let Some(fault) = input.fault {
                        if fault.stream_id == s.id
                            && fault.seq == frame.seq
                            && rt.last_bridge.as_deref() == Some(next_node.as_str())
                        {
                            dwell += fault.extra_delay;
                        }
                    }
                    let hop = rt
                        .ports
                        .iter()
                        .position(|&p| p == port)
                        .expect("port lies on the stream path");
                    let next_port = rt.ports[hop + 1];
                    push(
                        &mut heap,
                        &mut ord,
                        arrival + dwell,
                        Ev::Enqueue {
                            port: next_port,
                            frame,
                        },
                    );
                } else {
                    // Listener reached.
                    let mut dwell = input.model.listener_delivery.sample(&mut substream_rng(
                        seed, &next_node, "delivery", s.id, frame.seq,
                    ));
                    if input.probes.t4.enabled {
                        dwell += input
                            .model
                            .probe_overhead_for(input.probes.t4.method)
                            .sample(&mut substream_rng(
                                seed,
                                &next_node,
                                "probe_overhead",
                                s.id,
                                frame.seq,
                            ));
                    }
                    push(
                        &mut heap,
                        &mut ord,
                        arrival + dwell,
                        Ev::Deliver { frame, t4: arrival },
                    );
                }
            }
            Ev::Deliver { frame, t4 } => {
                let rec = records
                    .get_mut(&(frame.stream_id, frame.seq))
                    .expect("record created at release");
                if input.probes.t4.enabled {
                    rec.set(TsPoint::T4, t4, input.probes.t4.method);
                }
                if input.probes.t5.enabled {
                    rec.set(TsPoint::T5, at, input.probes.t5.method);
                }
                debug_assert!(rec.is_monotonic());
                delivered.insert((frame.stream_id, frame.seq));
            }
        }
    }

    // Whatever the horizon interrupted is still in flight.
    let mut in_flight = 0u64;
    for rt in &ports {
        for class in 0..8 {
            in_flight += rt.egress.queue_len(class) as u64;
        }
        if rt.in_tx.is_some() {
            in_flight += 1;
        }
    }
    for Reverse(item) in heap.drain() {
        match item.ev {
            Ev::Enqueue { .. } | Ev::Deliver { .. } => in_flight += 1,
            _ => {}
        }
    }
    debug_assert_eq!(generated, delivered.len() as u64 + in_flight);

    let records: Vec<TimestampRecord> = records
        .into_iter()
        .filter(|(key, _)| delivered.contains(key))
        .map(|(_, r)| r)
        .collect();

    Ok(TraceSet {
        records,
        port_events,
        meta: RunMeta {
            seed,
            profile: input.profile_name.to_string(),
            probes: *input.probes,
            schedule_fingerprint: schedule.fingerprint(),
            instant_zero: iz,
            duration: horizon - iz,
            frames_generated: generated,
            frames_delivered: delivered.len() as u64,
            frames_in_flight: in_flight,
        },
    })
}

fn assigned_window(
    schedule: &Schedule,
    rt: &StreamRt,
    stream: StreamId,
    seq: u64,
    port: &PortId,
) -> Option<(TimeNs, TimeNs)> {
    if rt.instances_per_hyperperiod == 0 {
        return None;
    }
    let instance = seq % rt.instances_per_hyperperiod;
    let occurrence = seq / rt.instances_per_hyperperiod;
    schedule
        .window_for(stream, instance, port)
        .map(|w| w.absolute(schedule.instant_zero, schedule.hyperperiod, occurrence))
}

/// Run the same inputs across several seeds, optionally in parallel.
///
/// Results come back in seed order and each run is a pure function of its
/// seed, so the thread count never changes any output.
pub fn run_seeds(
    input: &SimInput,
    seeds: &[u64],
    threads: usize,
) -> Result<Vec<TraceSet>, EngineError> {
    let threads = threads.max(1);
    if threads == 1 || seeds.len() <= 1 {
        return seeds
            .iter()
            .map(|&seed| run(&SimInput { seed, ..*input }))
            .collect();
    }
    let mut results: Vec<Option<Result<TraceSet, EngineError>>> =
        (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunk = seeds.len().div_ceil(threads);
        for (slot, seed_chunk) in results.chunks_mut(chunk).zip(seeds.chunks(chunk)) {
            scope.spawn(move || {
                for (out, &seed) in slot.iter_mut().zip(seed_chunk) {
                    *out = Some(run(&SimInput { seed, ..*input }));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every seed slot filled"))
        .collect()
}
