use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use aggraph_core::evolve::{step, FlowMap, Mode};
use aggraph_core::graph::SampledGraph;
use aggraph_core::norms::{dini_norm, omega_by_lag};
use aggraph_core::oracle::biot_savart_patch;
use aggraph_core::velocity::{core_fields, velocity_field};

fn bump(n: usize) -> SampledGraph {
    SampledGraph::from_fn(-1.2, 1.2, n, 0.0, |x| {
        let u: f64 = 1.0 - x * x;
        if u > 0.0 { 0.1 * u.powi(3) } else { 0.0 }
    })
    .unwrap()
}

fn velocity_kernels(c: &mut Criterion) {
    let g = bump(257);
    c.bench_function("core_fields n=257", |b| b.iter(|| core_fields(black_box(&g)).unwrap()));
    c.bench_function("velocity_field n=257", |b| b.iter(|| velocity_field(black_box(&g)).unwrap()));
}

fn transport_step(c: &mut Criterion) {
    let g = bump(257);
    let flow = FlowMap::seed(&[(-1.0, 1.0)], (-1.2, 1.2), 32);
    c.bench_function("step rescaled n=257", |b| {
        b.iter(|| step(black_box(&g), black_box(&flow), 2e-3, Mode::Rescaled).unwrap())
    });
}

fn oracle_point(c: &mut Criterion) {
    let g = bump(1025);
    c.bench_function("biot_savart_patch 2048 cols", |b| {
        b.iter(|| biot_savart_patch(black_box(&g), (0.4, 0.05), 2048))
    });
}

fn norm_kernels(c: &mut Criterion) {
    let g = bump(513);
    c.bench_function("omega_by_lag n=513", |b| b.iter(|| omega_by_lag(black_box(&g))));
    c.bench_function("dini_norm n=513", |b| b.iter(|| dini_norm(black_box(&g))));
}

criterion_group!(benches, velocity_kernels, transport_step, oracle_point, norm_kernels);
criterion_main!(benches);
