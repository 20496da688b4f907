use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drafttrace::editdist::{distance_bit_parallel, distance_dp, script};
use drafttrace_bench::draft_pair;
use std::hint::black_box;

fn distances(c: &mut Criterion) {
    let mut g = c.benchmark_group("char_distance");
    for len in [200usize, 1000, 4000] {
        let (a, b) = draft_pair(len, 1);
        g.bench_with_input(BenchmarkId::new("dp", len), &(&a, &b), |bench, (a, b)| {
            bench.iter(|| distance_dp(black_box(a), black_box(b)))
        });
        g.bench_with_input(
            BenchmarkId::new("bit_parallel", len),
            &(&a, &b),
            |bench, (a, b)| bench.iter(|| distance_bit_parallel(black_box(a), black_box(b))),
        );
    }
    g.finish();
}

fn scripts(c: &mut Criterion) {
    let mut g = c.benchmark_group("char_script");
    for len in [200usize, 1000, 4000] {
        let (a, b) = draft_pair(len, 2);
        g.bench_with_input(
            BenchmarkId::from_parameter(len),
            &(&a, &b),
            |bench, (a, b)| bench.iter(|| script(black_box(a), black_box(b))),
        );
    }
    g.finish();
}

criterion_group!(benches, distances, scripts);
criterion_main!(benches);
