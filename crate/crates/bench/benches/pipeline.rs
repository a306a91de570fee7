use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use reppoints_core::harness::{encode_mask, synthetic_corpus, Strategy};
use reppoints_core::{
    boundary_points, chamfer_loss, concave_hull, decode_triangulation, distance_map, DecodeConfig, SamplerSeed,
    SamplingBandConfig,
};

fn distance_field(c: &mut Criterion) {
    let mut g = c.benchmark_group("distance_map");
    for size in [64, 128, 256] {
        let mask = &synthetic_corpus(SamplerSeed(1), 1, size).unwrap()[0];
        let boundary = boundary_points(mask).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, &s| {
            b.iter(|| distance_map(black_box(&boundary), s, s).unwrap())
        });
    }
    g.finish();
}

fn decoders(c: &mut Criterion) {
    let mask = &synthetic_corpus(SamplerSeed(1), 1, 128).unwrap()[0];
    let cfg = DecodeConfig::default();
    let mut g = c.benchmark_group("decode");
    for n in [81, 729] {
        let pts = encode_mask(mask, Strategy::Dts, n, SamplingBandConfig::default(), SamplerSeed(2)).unwrap().points;
        g.bench_with_input(BenchmarkId::new("triangulation", n), &pts, |b, p| {
            b.iter(|| decode_triangulation(black_box(p), 128, 128, &cfg).unwrap())
        });
        let pts = encode_mask(mask, Strategy::Boundary, n, SamplingBandConfig::default(), SamplerSeed(2)).unwrap().points;
        g.bench_with_input(BenchmarkId::new("concave", n), &pts, |b, p| {
            b.iter(|| concave_hull(black_box(p), &cfg, 128, 128).unwrap())
        });
    }
    g.finish();
}

fn losses(c: &mut Criterion) {
    let corpus = synthetic_corpus(SamplerSeed(1), 2, 128).unwrap();
    let mut g = c.benchmark_group("chamfer");
    for n in [81, 729] {
        let enc = |i: usize| encode_mask(&corpus[i], Strategy::Dts, n, SamplingBandConfig::default(), SamplerSeed(3)).unwrap().points;
        let (a, b_) = (enc(0), enc(1));
        g.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| chamfer_loss(black_box(&a), black_box(&b_)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, distance_field, decoders, losses);
criterion_main!(benches);
