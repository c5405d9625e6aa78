use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multient::tensor::{eigh, matrix_kron, partial_trace};
use multient::DEFAULT_SIZE_CAP;
use multient_bench::{density_inputs, pure_inputs};

fn bench_eigh(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    for dims in [vec![2, 2], vec![2, 2, 2], vec![3, 3, 3], vec![4, 4, 4]] {
        let rho = &density_inputs(&dims, 1, 5)[0];
        let d = rho.matrix().nrows();
        group.bench_with_input(BenchmarkId::from_parameter(d), rho.matrix(), |b, m| b.iter(|| eigh(black_box(m)).unwrap()));
    }
    group.finish();
}

fn bench_partial_trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("partial_trace");
    for dims in [vec![2, 2, 2], vec![3, 3, 3], vec![2, 2, 2, 2, 2, 2]] {
        let rho = pure_inputs(&dims, 1, 7)[0].to_density();
        let keep: Vec<usize> = (0..dims.len() / 2).collect();
        let label = dims.iter().map(ToString::to_string).collect::<Vec<_>>().join("x");
        group.bench_function(label, |b| b.iter(|| partial_trace(black_box(rho.matrix()), &dims, &keep).unwrap()));
    }
    group.finish();
}

fn bench_kron(c: &mut Criterion) {
    let mut group = c.benchmark_group("kron");
    for d in [2usize, 4, 8] {
        let a = density_inputs(&[d], 1, 9)[0].matrix().clone();
        let b = density_inputs(&[d], 1, 10)[0].matrix().clone();
        group.bench_with_input(BenchmarkId::from_parameter(d * d), &(a, b), |bench, (a, b)| {
            bench.iter(|| matrix_kron(black_box(a), black_box(b), DEFAULT_SIZE_CAP).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_eigh, bench_partial_trace, bench_kron);
criterion_main!(benches);
