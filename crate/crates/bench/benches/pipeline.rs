use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drafttrace::granularity::select_granularity;
use drafttrace::trajectory::{distance_matrix, tsne_embed, TsneParams};
use drafttrace::{build_cloud, segment, Granularity, WriterKind};
use drafttrace_bench::history;
use std::hint::black_box;

fn segmentation(c: &mut Criterion) {
    let h = history(WriterKind::UniformReviser, 2, 200);
    let text = &h.versions[0].text;
    let mut g = c.benchmark_group("segment");
    for level in Granularity::ALL {
        g.bench_with_input(
            BenchmarkId::from_parameter(level),
            &level,
            |bench, &level| bench.iter(|| segment(black_box(text), level)),
        );
    }
    g.finish();
}

fn cloud(c: &mut Criterion) {
    let h = history(WriterKind::UniformReviser, 500, 40);
    c.bench_function("build_cloud/500x40", |bench| {
        bench.iter(|| build_cloud(black_box(&h), Granularity::Sentence))
    });
}

fn granularity(c: &mut Criterion) {
    let h = history(WriterKind::WordRewriter, 30, 8);
    c.bench_function("select_granularity/30x8", |bench| {
        bench.iter(|| select_granularity(black_box(&h), &Granularity::ALL, 200, 1))
    });
}

fn embedding(c: &mut Criterion) {
    let mut g = c.benchmark_group("tsne");
    g.sample_size(10);
    for n in [30usize, 100] {
        let h = history(WriterKind::UniformReviser, n, 8);
        let dm = distance_matrix(&h, Granularity::Character).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &dm, |bench, dm| {
            bench.iter(|| tsne_embed(black_box(dm), &TsneParams::default()))
        });
    }
    g.finish();
}

criterion_group!(benches, segmentation, cloud, granularity, embedding);
criterion_main!(benches);
