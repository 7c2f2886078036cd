use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ushaptic_bench::Fixture;
use ushaptic_core::sim::{hinge_load, step};
use ushaptic_core::Vec3;

fn field(c: &mut Criterion) {
    let f = Fixture::new();
    let probe = f.focus + Vec3::new(0.001, -0.002, 0.0);
    c.bench_function("pressure_at/996", |b| {
        b.iter(|| f.scenario.array.pressure_at(black_box(&f.phases), black_box(&probe)))
    });
    c.bench_function("solve_focus_phases/996", |b| {
        b.iter(|| f.scenario.array.solve_focus_phases(black_box(&f.focus)))
    });
}

fn load(c: &mut Criterion) {
    let f = Fixture::new();
    c.bench_function("force_torque/24x48", |b| {
        b.iter(|| hinge_load(&f.scenario, black_box(&f.state), &f.phases))
    });
}

fn tick(c: &mut Criterion) {
    let f = Fixture::new();
    let mut g = c.benchmark_group("step");
    g.sample_size(10);
    // tick 200 of the default sweep: x_fin = -0.018 m
    g.bench_function("curved/tick200", |b| b.iter(|| step(&f.scenario, black_box(200))));
    g.finish();
}

criterion_group!(benches, field, load, tick);
criterion_main!(benches);
