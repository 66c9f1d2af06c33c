//! Shared helpers for the oracle and acceptance suites: toy shaper
//! instances with a stepped brute-force reference, and randomized stream
//! sets with a worst-case confirmation run.
//!
//! Each test target uses its own subset of these.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use std::collections::VecDeque;

use tsnsim::engine::{run, Distribution, LatencyModel, ProbeConfig, SimInput};
use tsnsim::model::gcl::GclEntry;
use tsnsim::model::{use_case_topology, Frame, GateControlList, PortId, StreamSpec};
use tsnsim::profiler::{latencies, LatencyFigure};
use tsnsim::scheduler::{check_schedule, synthesize, NetworkParams, SchedulerError};
use tsnsim::tas::{replay_arrivals, EgressPort};
use tsnsim::time::TimeNs;

/// 8 Mb/s: one byte costs exactly one microsecond on the wire.
pub const TOY_RATE: u64 = 8_000_000;

pub fn us(v: i64) -> TimeNs {
    TimeNs::from_us(v)
}

pub struct ToyInstance {
    pub entries: Vec<(u8, i64)>, // (mask, duration_us)
    pub cycle_us: i64,
    /// (class, seq, size_bytes == tx_us, arrival_us)
    pub frames: Vec<(u8, u64, u32, i64)>,
}

pub fn generate_toy(rng: &mut StdRng) -> ToyInstance {
    let n_classes = rng.random_range(1..=3usize);
    let mut classes = Vec::new();
    while classes.len() < n_classes {
        let c = rng.random_range(0..8u8);
        if !classes.contains(&c) {
            classes.push(c);
        }
    }

    let cycle_us = rng.random_range(100..=1000i64);
    let n_entries = rng.random_range(1..=5usize);
    let mut cuts: Vec<i64> = (0..n_entries - 1)
        .map(|_| rng.random_range(1..cycle_us))
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut entries = Vec::new();
    let mut prev = 0;
    for cut in cuts.into_iter().chain([cycle_us]) {
        if cut == prev {
            continue;
        }
        let mut mask = 0u8;
        for &c in &classes {
            if rng.random_bool(0.6) {
                mask |= 1 << c;
            }
        }
        entries.push((mask, cut - prev));
        prev = cut;
    }

    let n_frames = rng.random_range(1..=10usize);
    let frames = (0..n_frames)
        .map(|i| {
            let class = classes[rng.random_range(0..classes.len())];
            let size = rng.random_range(64..=150u32);
            let arrival = rng.random_range(0..=2 * cycle_us);
            (class, i as u64, size, arrival)
        })
        .collect();

    ToyInstance {
        entries,
        cycle_us,
        frames,
    }
}

/// Gate mask at microsecond `t_us`, from first principles (modular walk over
/// the entry list, no production gate-query code).
pub fn mask_at(instance: &ToyInstance, t_us: i64) -> u8 {
    let mut phase = t_us % instance.cycle_us;
    for &(mask, dur) in &instance.entries {
        if phase < dur {
            return mask;
        }
        phase -= dur;
    }
    unreachable!("durations partition the cycle")
}

/// Stepped reference at 1 us granularity: at each tick arrivals enqueue,
/// then the idle port starts the highest-priority frame whose whole
/// transmission lies in open gate time.
pub fn brute_force(instance: &ToyInstance, horizon_us: i64) -> Vec<(u8, u64, i64)> {
    let mut queues: [VecDeque<(u8, u64, u32)>; 8] = Default::default();
    let mut arrivals = instance.frames.clone();
    arrivals.sort_by_key(|&(_, seq, _, at)| (at, seq));
    let mut next_arrival = 0usize;
    let mut busy_until = 0i64;
    let mut out = Vec::new();

    for t in 0..horizon_us {
        while next_arrival < arrivals.len() && arrivals[next_arrival].3 == t {
            let (class, seq, size, _) = arrivals[next_arrival];
            queues[class as usize].push_back((class, seq, size));
            next_arrival += 1;
        }
        if t < busy_until {
            continue;
        }
        for class in (0..8u8).rev() {
            let Some(&(_, seq, size)) = queues[class as usize].front() else {
                continue;
            };
            let tx_us = size as i64;
            let fits = (0..tx_us).all(|j| mask_at(instance, t + j) & (1 << class) != 0);
            if fits {
                queues[class as usize].pop_front();
                out.push((class, seq, t));
                busy_until = t + tx_us;
                break;
            }
        }
    }
    out
}

/// The event-driven shaper on the same instance.
pub fn run_event_driven(instance: &ToyInstance) -> Vec<(u8, u64, i64)> {
    let entries = instance
        .entries
        .iter()
        .map(|&(mask, dur)| GclEntry::new(mask, us(dur)))
        .collect();
    let gcl = GateControlList::new(TimeNs::ZERO, us(instance.cycle_us), entries).unwrap();
    let port = EgressPort::new(PortId::new("a", "b"), gcl, TOY_RATE);
    let arrivals: Vec<(Frame, TimeNs)> = instance
        .frames
        .iter()
        .map(|&(class, seq, size, at)| {
            (
                Frame {
                    stream_id: class as u32,
                    seq,
                    size,
                    traffic_class: class,
                    release_time: us(at),
                },
                us(at),
            )
        })
        .collect();
    replay_arrivals(port, &arrivals)
        .unwrap()
        .into_iter()
        .map(|r| {
            assert_eq!(r.start.as_ns() % 1_000, 0, "toy starts are whole us");
            (r.frame.traffic_class, r.frame.seq, r.start.as_ns() / 1_000)
        })
        .collect()
}

/// Compare event-driven and brute-force shapers on one instance; returns the
/// number of transmissions both agreed on.
pub fn check_toy_instance(instance: &ToyInstance, case: usize) -> usize {
    let max_arrival = instance.frames.iter().map(|f| f.3).max().unwrap_or(0);
    let horizon = max_arrival + 12 * (instance.cycle_us + 160);
    let expected = brute_force(instance, horizon);
    let got = run_event_driven(instance);
    assert_eq!(
        got, expected,
        "case {case}: entries {:?} cycle {} frames {:?}",
        instance.entries, instance.cycle_us, instance.frames
    );
    expected.len()
}

/// Random small stream set over the bundled topology, distinct classes.
pub fn random_streams(rng: &mut StdRng) -> Vec<StreamSpec> {
    let topo = use_case_topology();
    let n = rng.random_range(1..=4usize);
    let talkers = ["h1", "h2", "h4"];
    let mut classes: Vec<u8> = (1..=7).collect();
    (0..n)
        .map(|i| {
            let period = TimeNs::from_ms([2, 4, 8][rng.random_range(0..3usize)]);
            let class = classes.remove(rng.random_range(0..classes.len()));
            let mut s = StreamSpec {
                id: i as u32,
                talker: talkers[rng.random_range(0..talkers.len())].into(),
                listener: "h3".into(),
                period,
                deadline: period,
                jitter_bound: period,
                frame_size: rng.random_range(64..=1500),
                traffic_class: class,
                path: vec![],
            };
            s.resolve_path(&topo).unwrap();
            s
        })
        .collect()
}

pub fn random_params(rng: &mut StdRng) -> NetworkParams {
    NetworkParams {
        bridge_latency_bound: TimeNs::from_us([0, 50, 100, 200][rng.random_range(0..4usize)]),
        intrinsic_jitter: TimeNs::from_us([0, 50, 100, 200][rng.random_range(0..4usize)]),
    }
}

/// Latency model at the maximal values the schedule contract allows.
pub fn worst_case_model(params: &NetworkParams) -> LatencyModel {
    let mut model = LatencyModel::zero();
    model.talker_send =
        Distribution::constant(TimeNs::from_ns(2 * params.intrinsic_jitter.as_ns()));
    model.bridge_residence = Distribution::constant(params.bridge_latency_bound);
    model
}

/// Synthesize, check, and confirm by a deterministic maximal-latency run
/// over two hyperperiods. Returns true when the instance was feasible.
pub fn confirm_by_worst_case_simulation(
    streams: &[StreamSpec],
    params: &NetworkParams,
    case: usize,
) -> bool {
    let topo = use_case_topology();
    let schedule = match synthesize(streams, &topo, params) {
        Ok(s) => s,
        Err(SchedulerError::Infeasible { .. }) => return false,
        Err(e) => panic!("case {case}: unexpected synthesis error {e}"),
    };
    let report = check_schedule(&schedule, streams, &topo, params);
    assert!(
        report.is_feasible(),
        "case {case}: synthesizer output fails its own checker:\n{report}"
    );

    let model = worst_case_model(params);
    let probes = ProbeConfig::bridges_disabled();
    let traces = run(&SimInput {
        topology: &topo,
        streams,
        schedule: &schedule,
        model: &model,
        probes: &probes,
        duration: TimeNs::from_ns(2 * schedule.hyperperiod.as_ns()),
        seed: 0,
        profile_name: "worst-case",
        fault: None,
    })
    .unwrap();

    let min_expected: u64 = streams
        .iter()
        .map(|s| s.instances_per_hyperperiod(schedule.hyperperiod))
        .sum();
    assert!(
        traces.meta.frames_delivered >= min_expected,
        "case {case}: only {} of at least {min_expected} frames delivered",
        traces.meta.frames_delivered
    );

    for r in &traces.records {
        let s = streams.iter().find(|s| s.id == r.stream_id).unwrap();
        let l = latencies(r).unwrap();
        let e2e_nic = l[&LatencyFigure::E2eNic];
        assert!(
            e2e_nic <= s.deadline,
            "case {case}: stream {} seq {} missed deadline: {e2e_nic:?}",
            r.stream_id,
            r.seq
        );
        let analytic = report.stream_worst_case[&s.id];
        assert!(
            e2e_nic <= analytic,
            "case {case}: stream {} seq {}: simulated {e2e_nic:?} above analytic bound {analytic:?}",
            r.stream_id,
            r.seq
        );
    }

    for (port, events) in &traces.port_events {
        for ev in events {
            let (open, close) = ev
                .window
                .unwrap_or_else(|| panic!("case {case}: no reservation on {port}"));
            assert!(
                ev.start >= open && ev.finish <= close,
                "case {case}: port {port} stream {} seq {} outside its window",
                ev.stream_id,
                ev.seq
            );
        }
    }
    true
}
