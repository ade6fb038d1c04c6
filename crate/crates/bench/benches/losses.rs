use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scribblekit::affinity::build_graph;
use scribblekit::losses::{gsa_loss, gsa_loss_dense, lsc_loss, LscKernelConfig};
use scribblekit::{FeatureField, PatchSaliency, RgbImage, SaliencyMap};

fn affinity(c: &mut Criterion) {
    let mut group = c.benchmark_group("gsa_loss");
    group.sample_size(20);
    for (side, dim) in [(20, 384), (40, 384)] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = side * side;
        let field = FeatureField::new(side, side, dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let patch = PatchSaliency::new(side, side, (0..n).map(|_| rng.random()).collect()).unwrap();
        let factored = build_graph(&field, false).unwrap();
        let dense = build_graph(&field, true).unwrap();
        let label = format!("N={n},D={dim}");
        group.bench_with_input(BenchmarkId::new("factored", &label), &patch, |b, p| {
            b.iter(|| gsa_loss(black_box(p), &factored).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dense", &label), &patch, |b, p| {
            b.iter(|| gsa_loss_dense(black_box(p), &dense).unwrap())
        });
    }
    group.finish();
}

fn coherence(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let image = RgbImage::from_fn(64, 64, |_, _| [rng.random(), rng.random(), rng.random()]).unwrap();
    let pred = SaliencyMap::new(64, 64, (0..64 * 64).map(|_| rng.random()).collect()).unwrap();
    c.bench_function("lsc_loss 64x64 r5", |b| {
        b.iter(|| lsc_loss(black_box(&pred), &image, LscKernelConfig::default()).unwrap())
    });
}

criterion_group!(benches, affinity, coherence);
criterion_main!(benches);
