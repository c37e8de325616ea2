use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hdfa_bench::nrl_config;
use hdfa_core::{
    integrate_forward, invert_pairing, relax_bidirectional, sweep_pump_power, InversionSettings,
    Parallelism,
};

fn propagation(c: &mut Criterion) {
    let cfg = nrl_config();
    let mut unchecked = cfg.clone();
    unchecked.numerics.halving_tolerance = None;
    c.bench_function("forward 2.5 m, halving check", |b| {
        b.iter(|| integrate_forward(black_box(&cfg)))
    });
    c.bench_function("forward 2.5 m, no halving check", |b| {
        b.iter(|| integrate_forward(black_box(&unchecked)))
    });

    let mut ase = cfg.clone();
    ase.ase.enabled = true;
    let mut group = c.benchmark_group("ase");
    group.sample_size(10);
    group.bench_function("relaxation, 250 bins each way", |b| {
        b.iter(|| relax_bidirectional(black_box(&ase)))
    });
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let cfg = nrl_config();
    let powers: Vec<f64> = (0..=25).map(|i| i as f64 / 10.0).collect();
    let mut group = c.benchmark_group("analysis");
    group.sample_size(10);
    for (name, par) in [("serial", Parallelism::Serial), ("auto", Parallelism::Auto)] {
        group.bench_function(format!("pump sweep 26 points, {name}"), |b| {
            b.iter(|| sweep_pump_power(black_box(&cfg), &powers, par))
        });
    }
    group.bench_function("pairing inversion", |b| {
        b.iter(|| {
            invert_pairing(
                black_box(&cfg),
                (1860e-9, 1940e-9),
                1.3,
                1.17,
                InversionSettings::default(),
                Parallelism::Auto,
            )
        })
    });
    group.finish();
}

criterion_group!(benches, propagation, analysis);
criterion_main!(benches);
