use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use photon_teleport_bench::fixture;
use photon_teleport_core::povm::time_distribution;
use photon_teleport_core::{run_sweep, Fourier, Protocol};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fourier");
    for n in [256, 1024, 4096] {
        let f = fixture(n);
        let fourier = Fourier::new(&f.grid);
        group.bench_with_input(BenchmarkId::new("forward", n), &f, |b, f| {
            b.iter(|| fourier.forward(black_box(f.input.amplitudes())))
        });
    }
    let f = fixture(256);
    group.bench_function("time_distribution/256", |b| b.iter(|| time_distribution(black_box(&f.input))));
    group.bench_function("biphoton_time_domain/256", |b| b.iter(|| black_box(&f.pair).time_domain_amplitude()));
    group.finish();
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    for n in [128, 256] {
        let f = fixture(n);
        let proto = Protocol::new(&f.pair, &f.input, f.config.mirror).unwrap();
        group.bench_with_input(BenchmarkId::new("outcome_map", n), &proto, |b, p| b.iter(|| p.outcome_map()));
        let index = proto.outcome_map().max_density_index();
        let (t, om) = proto.outcomes().outcome(index);
        group.bench_with_input(BenchmarkId::new("teleport_once", n), &proto, |b, p| {
            b.iter(|| p.teleport_once(black_box(t), black_box(om)).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let config = fixture(128).config;
    group.bench_function("default_schedule/128", |b| b.iter(|| run_sweep(black_box(&config)).unwrap()));
    group.finish();
}

criterion_group!(benches, transforms, protocol, sweep);
criterion_main!(benches);
