//! Sequential vs rayon execution of the Monte-Carlo loops.
//!
//! Without the `parallel` feature both variants run on one thread.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use pcurve::curve::{Arc, Segment};
use pcurve::domain::{sample_uniform, Domain};
use pcurve::validate::{energy_of, voronoi_barycenters_of};
use pcurve::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_uniform");
    let ball = Domain::ball(1.0, 3).unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "ball3_200k"), &exec, |b, &exec| {
            b.iter(|| sample_uniform(black_box(&ball), 200_000, 1, None, exec).unwrap())
        });
    }
    g.finish();
}

fn barycenters(c: &mut Criterion) {
    let mut g = c.benchmark_group("voronoi_barycenters");
    let qd = Domain::quarter_disk(1.0).unwrap();
    let arc = Arc::quarter(2.0 / 3.0);
    let cloud = sample_uniform(&qd, 200_000, 1, None, Execution::Parallel).unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "arc_32_nodes"), &exec, |b, &exec| {
            b.iter(|| voronoi_barycenters_of(&arc, 32, black_box(&cloud), None, exec).unwrap())
        });
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let mut g = c.benchmark_group("energy");
    g.sample_size(10);
    let ball = Domain::ball(1.0, 3).unwrap();
    let diam = Segment::new(vec![-1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]).unwrap();
    let cloud = sample_uniform(&ball, 50_000, 1, None, Execution::Parallel).unwrap();
    for (name, exec) in POLICIES {
        g.bench_with_input(BenchmarkId::new(name, "ball_diameter"), &exec, |b, &exec| {
            b.iter(|| energy_of(&diam, black_box(&cloud), exec))
        });
    }
    g.finish();
}

criterion_group!(benches, sampling, barycenters, energy);
criterion_main!(benches);
