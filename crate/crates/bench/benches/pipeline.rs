//! Pipeline benchmarks: schedule synthesis, simulation, characterization,
//! shaper replay and summary statistics.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use tsnsim::engine::{characterize, run, PlatformProfile, ProbeConfig, SimInput};
use tsnsim::model::gcl::GclEntry;
use tsnsim::model::{use_case_streams, use_case_topology, Frame, GateControlList, PortId};
use tsnsim::profiler::summarize;
use tsnsim::scheduler::{synthesize, NetworkParams};
use tsnsim::tas::{replay_arrivals, EgressPort};
use tsnsim::time::TimeNs;

fn bench_synthesize(c: &mut Criterion) {
    let topo = use_case_topology();
    let streams = use_case_streams();
    let params = NetworkParams::default();
    c.bench_function("synthesize_use_case", |b| {
        b.iter(|| synthesize(black_box(&streams), &topo, &params).unwrap())
    });
}

fn bench_simulate(c: &mut Criterion) {
    let topo = use_case_topology();
    let streams = use_case_streams();
    let schedule = synthesize(&streams, &topo, &NetworkParams::default()).unwrap();
    let model = PlatformProfile::c2().model;
    let probes = ProbeConfig::default();
    let input = SimInput {
        topology: &topo,
        streams: &streams,
        schedule: &schedule,
        model: &model,
        probes: &probes,
        duration: TimeNs::from_ms(180),
        seed: 42,
        profile_name: "C2",
        fault: None,
    };
    c.bench_function("simulate_use_case_3_hyperperiods", |b| {
        b.iter(|| run(black_box(&input)).unwrap())
    });
}

fn bench_characterize(c: &mut Criterion) {
    let profile = PlatformProfile::c2();
    let probes = ProbeConfig::default();
    c.bench_function("characterize_c2_200_frames", |b| {
        b.iter(|| characterize(black_box(&profile), &probes, 200, 7).unwrap())
    });
}

fn bench_tas_replay(c: &mut Criterion) {
    let gcl = GateControlList::new(
        TimeNs::ZERO,
        TimeNs::from_ms(1),
        vec![
            GclEntry::new(0x08, TimeNs::from_us(300)),
            GclEntry::new(0xF7, TimeNs::from_us(700)),
        ],
    )
    .unwrap();
    let arrivals: Vec<(Frame, TimeNs)> = (0..64)
        .map(|i| {
            (
                Frame {
                    stream_id: 0,
                    seq: i,
                    size: 1500,
                    traffic_class: 3,
                    release_time: TimeNs::from_us(i as i64 * 40),
                },
                TimeNs::from_us(i as i64 * 40),
            )
        })
        .collect();
    c.bench_function("tas_replay_64_frames", |b| {
        b.iter_batched(
            || EgressPort::new(PortId::new("B1", "B2"), gcl.clone(), 1_000_000_000),
            |port| replay_arrivals(port, black_box(&arrivals)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_summarize(c: &mut Criterion) {
    let series: Vec<TimeNs> = (0..10_000)
        .map(|i| TimeNs::from_ns(200_000 + (i * 7919) % 100_000))
        .collect();
    c.bench_function("summarize_10k_series", |b| {
        b.iter(|| summarize(black_box(&series)).unwrap())
    });
}

criterion_group!(
    benches,
    bench_synthesize,
    bench_simulate,
    bench_characterize,
    bench_tas_replay,
    bench_summarize
);
criterion_main!(benches);
