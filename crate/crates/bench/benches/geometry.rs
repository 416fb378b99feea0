use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypflow_bench::{perturbed, spectrum};
use hypflow_core::flow::{self, FlowState};
use hypflow_core::hypersurface::{geometry_fields, quermassintegrals};
use hypflow_core::symfunc::{esym_all, quotient_slice};
use hypflow_core::SphereGrid;

fn symmetric_functions(c: &mut Criterion) {
    let mut group = c.benchmark_group("symfunc");
    for n in [2, 4, 6] {
        let kappa = spectrum(n);
        group.bench_with_input(BenchmarkId::new("esym_all", n), &kappa, |b, k| {
            let mut out = [0.0; 8];
            b.iter(|| esym_all(black_box(k), &mut out));
        });
        let mut grad = vec![0.0; n];
        group.bench_with_input(BenchmarkId::new("quotient_with_grad", n), &kappa, |b, k| {
            b.iter(|| quotient_slice(black_box(k), 1, Some(&mut grad)).unwrap());
        });
    }
    group.finish();
}

fn geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometry_fields");
    for (label, grid) in [
        ("full_J48", SphereGrid::full(48).unwrap()),
        ("full_J96", SphereGrid::full(96).unwrap()),
        ("axisym_n4_J96", SphereGrid::axisymmetric(4, 96).unwrap()),
    ] {
        let g = perturbed(&grid, 0.05);
        group.bench_function(label, |b| b.iter(|| geometry_fields(black_box(&g)).unwrap()));
        let f = geometry_fields(&g).unwrap();
        group.bench_function(format!("{label}_quermass"), |b| {
            b.iter(|| quermassintegrals(black_box(&g), &f).unwrap())
        });
    }
    group.finish();
}

fn flow_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_step");
    for (label, grid) in [("full_J48", SphereGrid::full(48).unwrap()), ("axisym_J96", SphereGrid::axisymmetric(2, 96).unwrap())] {
        let state = FlowState::new(perturbed(&grid, 0.05), 1).unwrap();
        let dt = state.stable_dt(0.2);
        group.bench_function(label, |b| b.iter(|| flow::step(black_box(&state), dt).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, symmetric_functions, geometry, flow_step);
criterion_main!(benches);
