use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mpwa_bench::fixture;
use mpwa_core::community::{gmc, lpc, LpcConfig};
use mpwa_core::features::{centralities, raw_features_batch, CommunitySettings};
use mpwa_core::gnn::{batch_loss_and_grads, encode, sample_graph_negatives, TrainBatch};
use mpwa_core::inference::{gdfa, tgdfa};
use mpwa_core::{LinkSet, ModelConfig, ScoreMatrix};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_algorithms(c: &mut Criterion) {
    let fx = fixture(50);
    let g = fx.largest();
    let t = g.topology();
    c.bench_function("centralities/largest", |b| b.iter(|| centralities(black_box(t))));
    c.bench_function("gmc/largest", |b| b.iter(|| gmc(black_box(t), 1.0).unwrap()));
    c.bench_function("lpc/largest", |b| b.iter(|| lpc(black_box(t), 7, &LpcConfig::default())));
    let settings = CommunitySettings::default();
    c.bench_function("raw_features/50_sentences", |b| b.iter(|| raw_features_batch(black_box(&fx.graphs), &settings)));
}

fn model(c: &mut Criterion) {
    let fx = fixture(10);
    let g = fx.largest();
    let config = ModelConfig::default();
    let inputs = fx.inputs(g, &config);
    let params = fx.params(&config);
    c.bench_function("encode/largest_h512", |b| {
        b.iter(|| encode(black_box(&params), &config.features, config.leaky_slope, g.topology(), &inputs))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let positives: Vec<(usize, usize)> = g.topology().edges().collect();
    let negatives = sample_graph_negatives(g, &positives, &mut rng);
    let batch = TrainBatch { positives, negatives };
    let mut grads = params.zeros_like();
    c.bench_function("loss_and_grads/largest_h512", |b| {
        b.iter(|| {
            batch_loss_and_grads(&params, &config.features, config.leaky_slope, g.topology(), &inputs, &batch, Some(&mut grads))
        })
    });
}

fn symmetrization(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 30;
    let random = |rng: &mut ChaCha8Rng| -> LinkSet {
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.05)).collect()
    };
    let (f, bw) = (random(&mut rng), random(&mut rng));
    c.bench_function("gdfa/30x30", |b| b.iter(|| gdfa(black_box(&f), black_box(&bw), n, n)));
    let s = ScoreMatrix {
        scores: Array2::from_shape_fn((n, n), |_| rng.gen_range(-3.0..3.0)),
    };
    c.bench_function("tgdfa/30x30", |b| b.iter(|| tgdfa(black_box(&s), 2.0)));
}

criterion_group!(benches, graph_algorithms, model, symmetrization);
criterion_main!(benches);
