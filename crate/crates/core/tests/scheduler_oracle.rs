//! Synthesizer soundness: whatever `synthesize` emits must pass the analytic
//! checker, and a worst-case deterministic simulation must confirm every
//! deadline the checker claims.

use rand::rngs::StdRng;
use rand::SeedableRng;

use tsnsim::engine::{run, ProbeConfig, SimInput};
use tsnsim::model::{use_case_topology, StreamSpec};
use tsnsim::profiler::{latencies, LatencyFigure};
use tsnsim::scheduler::{check_schedule, synthesize, NetworkParams, SchedulerError};
use tsnsim::time::TimeNs;

#[path = "support/mod.rs"]
mod support;
use support::{confirm_by_worst_case_simulation, random_params, random_streams, worst_case_model};

#[test]
fn randomized_stream_sets_are_sound() {
    let mut rng = StdRng::seed_from_u64(0x5ced);
    let mut feasible = 0usize;
    for case in 0..120 {
        let streams = random_streams(&mut rng);
        let params = random_params(&mut rng);
        if confirm_by_worst_case_simulation(&streams, &params, case) {
            feasible += 1;
        }
    }
    assert!(feasible >= 30, "only {feasible} feasible cases generated");
}

#[test]
fn worst_case_simulation_reaches_the_analytic_bound() {
    // With maximal latencies and an unconflicted schedule, the simulated
    // worst case must actually touch the checker's bound, not just stay
    // under it.
    let topo = use_case_topology();
    let streams = vec![{
        let mut s = StreamSpec {
            id: 0,
            talker: "h1".into(),
            listener: "h3".into(),
            period: TimeNs::from_ms(8),
            deadline: TimeNs::from_ms(8),
            jitter_bound: TimeNs::from_ms(8),
            frame_size: 1500,
            traffic_class: 3,
            path: vec![],
        };
        s.resolve_path(&topo).unwrap();
        s
    }];
    let params = NetworkParams {
        bridge_latency_bound: TimeNs::from_us(100),
        intrinsic_jitter: TimeNs::from_us(100),
    };
    let schedule = synthesize(&streams, &topo, &params).unwrap();
    let report = check_schedule(&schedule, &streams, &topo, &params);
    assert!(report.is_feasible());

    let model = worst_case_model(&params);
    let probes = ProbeConfig::bridges_disabled();
    let traces = run(&SimInput {
        topology: &topo,
        streams: &streams,
        schedule: &schedule,
        model: &model,
        probes: &probes,
        duration: TimeNs::from_ns(2 * schedule.hyperperiod.as_ns()),
        seed: 0,
        profile_name: "worst-case",
        fault: None,
    })
    .unwrap();
    let worst = traces
        .records
        .iter()
        .map(|r| latencies(r).unwrap()[&LatencyFigure::E2eNic])
        .max()
        .unwrap();
    assert_eq!(worst, report.stream_worst_case[&0]);
}

#[test]
fn constructed_overload_raises_infeasible() {
    // Two streams sharing every hop, each saturating its period with one
    // transmission; the second window cannot close before the deadline.
    let topo = use_case_topology();
    let mk = |id, class| {
        let mut s = StreamSpec {
            id,
            talker: "h1".into(),
            listener: "h3".into(),
            period: TimeNs::from_us(12),
            deadline: TimeNs::from_us(12),
            jitter_bound: TimeNs::from_us(12),
            frame_size: 1500,
            traffic_class: class,
            path: vec![],
        };
        s.resolve_path(&topo).unwrap();
        s
    };
    let params = NetworkParams {
        bridge_latency_bound: TimeNs::ZERO,
        intrinsic_jitter: TimeNs::ZERO,
    };
    let err = synthesize(&[mk(0, 5), mk(1, 4)], &topo, &params).unwrap_err();
    assert!(matches!(err, SchedulerError::Infeasible { .. }), "{err}");
    // The same pair on one shared class is rejected as well.
    let err = synthesize(&[mk(0, 5), mk(1, 5)], &topo, &params).unwrap_err();
    assert!(matches!(err, SchedulerError::Infeasible { .. }), "{err}");
}
