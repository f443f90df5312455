//! Sequential vs. rayon execution of the batch entry points.
//!
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use groupoid_flow::dae::LinearDae;
use groupoid_flow::dynamics::{classify_batch, sequence_extract_with, ClassifyOptions};
use groupoid_flow::expr::ExprField;
use groupoid_flow::lagrangian::catalog::midpoint_oscillator;
use groupoid_flow::lagrangian::{flow_lagrangian_set, HamiltonianSystem};
use groupoid_flow::numkernel::{Matrix, TolerancePolicy, Vector};
use groupoid_flow::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn grid(n: usize) -> Vec<Vec<f64>> {
    (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            vec![-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64]
        })
        .collect()
}

fn classify(c: &mut Criterion) {
    let lag = midpoint_oscillator(0.1);
    let set = lag.lagrangian_set(TolerancePolicy::default());
    let points: Vec<Vec<f64>> = grid(6).iter().map(|g| lag.differential(g).unwrap()).collect();
    let mut group = c.benchmark_group("classify_batch");
    for (name, exec) in MODES {
        let opts = ClassifyOptions { depth: 3, exec, ..Default::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| classify_batch(&set, black_box(&points), &opts).unwrap())
        });
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let hs = HamiltonianSystem::new(ExprField::parse("(p^2 + q^2)/2", &["q", "p"], &[]).unwrap(), 1).unwrap();
    let points = grid(16);
    let mut group = c.benchmark_group("flow_lagrangian_set");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| flow_lagrangian_set(&hs, 0.1, black_box(&points), exec).unwrap())
        });
    }
    group.finish();
}

fn sequence(c: &mut Criterion) {
    let a = Matrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    let dae = LinearDae::new(
        3,
        Box::new(move |_| Ok(a.clone())),
        Box::new(|t: f64| Ok(Matrix::from_row_slice(3, 3, &[1.0, t, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 2.0 + t.sin()]))),
        Box::new(|t: f64| Ok(Vector::from_column_slice(&[t.cos(), 0.0, t.sin()]))),
        0.0,
        0.01,
        TolerancePolicy::default(),
    )
    .unwrap();
    let seq = dae.as_sequence(64).unwrap();
    let mut group = c.benchmark_group("sequence_extract");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sequence_extract_with(black_box(&seq), 0, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, classify, flow, sequence);
criterion_main!(benches);
