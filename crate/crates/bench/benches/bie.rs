//! Boundary-integral solve for one small perfectly conducting sphere.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smallscat::bie::solve_current;
use smallscat::shape::make_icosphere;
use smallscat_bench::context;

fn bie(c: &mut Criterion) {
    let ctx = context();
    let mut group = c.benchmark_group("bie");
    group.sample_size(10);
    for refinement in [1, 2] {
        let mesh = make_icosphere(0.05, refinement).expect("mesh");
        group.bench_with_input(BenchmarkId::new("solve_current", mesh.face_count()), &mesh, |b, m| {
            b.iter(|| solve_current(m, &ctx).expect("solve"))
        });
    }
    group.finish();
}

criterion_group!(benches, bie);
criterion_main!(benches);
