use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::negatives::sample_graph_negatives;
use super::network::{batch_loss_and_grads, TrainBatch};
use super::optim::AdamW;
use super::{ModelConfig, ModelParams};
use crate::features::{fnv1a, NodeInputs};
use crate::graph::AlignmentGraph;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    /// Sentences drawn from a larger training pool.
    pub train_sample: usize,
    pub seed: u64,
    /// Draw fresh batches and negatives in every epoch.
    pub resample_negatives: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1,
            batch_size: 400,
            lr: 1e-3,
            weight_decay: 0.01,
            train_sample: 6400,
            seed: 0,
            resample_negatives: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub sentences: usize,
    pub batch_losses: Vec<f32>,
}

impl TrainReport {
    /// Mean loss over the first and the last tenth of batches.
    pub fn decile_means(&self) -> Option<(f64, f64)> {
        let n = self.batch_losses.len();
        if n == 0 {
            return None;
        }
        let k = n.div_ceil(10);
        let mean = |s: &[f32]| s.iter().map(|&x| x as f64).sum::<f64>() / s.len() as f64;
        Some((mean(&self.batch_losses[..k]), mean(&self.batch_losses[n - k..])))
    }
}

/// Indices of at most `size` sentences, chosen by `seed`, in ascending order.
pub fn subsample(pool: usize, size: usize, seed: u64) -> Vec<usize> {
    if pool <= size {
        return (0..pool).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3e);
    let mut idx = rand::seq::index::sample(&mut rng, pool, size).into_vec();
    idx.sort_unstable();
    idx
}

/// Batches of one sentence: shuffled edges in a random orientation, split
/// into chunks of at most `batch_size` positives, each with its negatives.
pub fn sentence_batches<R: Rng>(g: &AlignmentGraph, batch_size: usize, rng: &mut R) -> Vec<TrainBatch> {
    let mut edges: Vec<(usize, usize)> = g
        .topology()
        .edges()
        .map(|(u, v)| if rng.gen_bool(0.5) { (v, u) } else { (u, v) })
        .collect();
    edges.shuffle(rng);
    edges
        .chunks(batch_size.max(1))
        .map(|chunk| TrainBatch {
            positives: chunk.to_vec(),
            negatives: sample_graph_negatives(g, chunk, rng),
        })
        .collect()
}

/// Trains `params` in place on every graph given. Each batch runs the encoder
/// over the whole sentence graph and takes one optimizer step.
pub fn train(
    graphs: &[AlignmentGraph],
    inputs: &[NodeInputs],
    config: &ModelConfig,
    params: &mut ModelParams<f32>,
    tc: &TrainConfig,
    mut on_batch: impl FnMut(usize, f32),
) -> Result<TrainReport> {
    if graphs.iter().all(|g| g.edge_count() == 0) {
        return Err(Error::EmptyTrainingSet);
    }
    let mut opt = AdamW::new(tc.lr, tc.weight_decay);
    let mut order_rng = ChaCha8Rng::seed_from_u64(tc.seed);
    let mut report = TrainReport {
        sentences: graphs.len(),
        batch_losses: Vec::new(),
    };
    let mut grads = params.zeros_like();
    for epoch in 0..tc.epochs {
        let mut order: Vec<usize> = (0..graphs.len()).collect();
        order.shuffle(&mut order_rng);
        let batch_epoch = if tc.resample_negatives { epoch as u64 } else { 0 };
        for &s in &order {
            let g = &graphs[s];
            let seed = tc.seed ^ fnv1a(g.sentence_id().as_bytes()) ^ batch_epoch.wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for batch in sentence_batches(g, tc.batch_size, &mut rng) {
                for (_, t) in grads.tensors_mut() {
                    t.fill(0.0);
                }
                let loss = batch_loss_and_grads(
                    params,
                    &config.features,
                    config.leaky_slope,
                    g.topology(),
                    &inputs[s],
                    &batch,
                    Some(&mut grads),
                );
                opt.step(params, &grads)?;
                report.batch_losses.push(loss);
                on_batch(report.batch_losses.len(), loss);
            }
        }
    }
    Ok(report)
}
