//! Encoder, decoder and the per-batch loss with its gradient.

use ndarray::{s, Array2, ArrayView2, Axis};

use super::layers::{
    dense_backward, dense_forward, gat_backward, gat_forward, mul_t, neighborhoods, relu,
    relu_backward, GatCache,
};
use super::loss::loss_and_logit_grads;
use super::ModelParams;
use crate::features::{assemble_backward, assemble_features, FeatureConfig, NodeInputs};
use crate::graph::Topology;
use crate::num::lit;
use crate::Real;

pub(crate) struct EncoderCache<T> {
    nb: Vec<Vec<usize>>,
    g1: GatCache<T>,
    pre1: Array2<T>,
    g2: GatCache<T>,
    pre2: Array2<T>,
    h2: Array2<T>,
}

pub(crate) fn encode_forward<T: Real>(
    p: &ModelParams<T>,
    t: &Topology,
    x: Array2<T>,
    slope: f64,
) -> (Array2<T>, EncoderCache<T>) {
    let slope = lit(slope);
    let nb = neighborhoods(t);
    let (pre1, g1) = gat_forward(x, &nb, &p.gat1_w, &p.gat1_a, slope);
    let h1 = relu(&pre1);
    let (pre2, g2) = gat_forward(h1, &nb, &p.gat2_w, &p.gat2_a, slope);
    let h2 = relu(&pre2);
    let h = dense_forward(h2.view(), &p.enc_w, &p.enc_b);
    let cache = EncoderCache {
        nb,
        g1,
        pre1,
        g2,
        pre2,
        h2,
    };
    (h, cache)
}

/// Returns the gradient with respect to the encoder input.
pub(crate) fn encode_backward<T: Real>(
    p: &ModelParams<T>,
    c: &EncoderCache<T>,
    slope: f64,
    dh: &Array2<T>,
    g: &mut ModelParams<T>,
) -> Array2<T> {
    let slope = lit(slope);
    let mut d2 = dense_backward(c.h2.view(), &p.enc_w, dh, &mut g.enc_w, &mut g.enc_b);
    relu_backward(&c.pre2, &mut d2);
    let mut d1 = gat_backward(&c.g2, &c.nb, &p.gat2_w, &p.gat2_a, slope, &d2, &mut g.gat2_w, &mut g.gat2_a);
    relu_backward(&c.pre1, &mut d1);
    gat_backward(&c.g1, &c.nb, &p.gat1_w, &p.gat1_a, slope, &d1, &mut g.gat1_w, &mut g.gat1_a)
}

/// Hidden states of every node.
pub fn encode<T: Real>(
    p: &ModelParams<T>,
    features: &FeatureConfig,
    slope: f64,
    t: &Topology,
    inputs: &NodeInputs,
) -> Array2<T> {
    let x = assemble_features(&p.embeddings, features, inputs);
    encode_forward(p, t, x, slope).0
}

/// Per-node halves of the first decoder layer, so that the logit of any
/// ordered pair costs one hidden-width pass.
pub struct PairScorer<'a, T> {
    left: Array2<T>,
    right: Array2<T>,
    params: &'a ModelParams<T>,
}

impl<'a, T: Real> PairScorer<'a, T> {
    pub fn new(params: &'a ModelParams<T>, h: ArrayView2<T>) -> Self {
        let width = params.dec1_w.nrows();
        let left = mul_t(h, params.dec1_w.slice(s![.., ..width]));
        let right = mul_t(h, params.dec1_w.slice(s![.., width..]));
        Self {
            left,
            right,
            params,
        }
    }

    /// Logit of `decode([h_i ‖ h_j])`.
    pub fn logit(&self, i: usize, j: usize) -> T {
        let b1 = self.params.dec1_b.row(0);
        let w2 = self.params.dec2_w.row(0);
        let mut acc = self.params.dec2_b[[0, 0]];
        let (l, r) = (self.left.row(i), self.right.row(j));
        for k in 0..l.len() {
            let v = l[k] + r[k] + b1[k];
            if v > T::zero() {
                acc += v * w2[k];
            }
        }
        acc
    }

    fn preactivation(&self, i: usize, j: usize) -> ndarray::Array1<T> {
        &self.left.row(i) + &self.right.row(j) + &self.params.dec1_b.row(0)
    }
}

/// Decoder probability and logit for one pair of hidden states.
pub fn decode_pair<T: Real>(p: &ModelParams<T>, hi: ArrayView2<T>, hj: ArrayView2<T>) -> (T, T) {
    let cat = ndarray::concatenate(Axis(1), &[hi, hj]).expect("hidden widths agree");
    let r = relu(&dense_forward(cat.view(), &p.dec1_w, &p.dec1_b));
    let logit = dense_forward(r.view(), &p.dec2_w, &p.dec2_b)[[0, 0]];
    (super::loss::sigmoid(logit), logit)
}

/// One training batch of ordered node pairs of a sentence graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrainBatch {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Batch loss and the side of every kink it passes through: the sign of each
/// ReLU and LeakyReLU input and whether each probability hits the loss clamp.
/// The loss is smooth along any segment of parameters sharing one pattern.
pub fn batch_loss_with_pattern<T: Real>(
    p: &ModelParams<T>,
    features: &FeatureConfig,
    slope: f64,
    t: &Topology,
    inputs: &NodeInputs,
    batch: &TrainBatch,
) -> (T, Vec<bool>) {
    let x = assemble_features(&p.embeddings, features, inputs);
    let (h, cache) = encode_forward(p, t, x, slope);
    let mut pattern = Vec::new();
    for g in [&cache.g1, &cache.g2] {
        pattern.extend(g.attention_logits().iter().flatten().map(|&v| v > T::zero()));
    }
    pattern.extend(cache.pre1.iter().chain(&cache.pre2).map(|&v| v > T::zero()));
    let scorer = PairScorer::new(p, h.view());
    let eps: T = lit(super::loss::LOSS_EPS);
    let mut pos = Vec::with_capacity(batch.positives.len());
    let mut neg = Vec::with_capacity(batch.negatives.len());
    for (k, &(i, j)) in batch.positives.iter().chain(&batch.negatives).enumerate() {
        pattern.extend(scorer.preactivation(i, j).iter().map(|&v| v > T::zero()));
        let z = scorer.logit(i, j);
        let prob = super::loss::sigmoid(z);
        pattern.push(prob < eps);
        pattern.push(prob > T::one() - eps);
        if k < batch.positives.len() {
            pos.push(z);
        } else {
            neg.push(z);
        }
    }
    (loss_and_logit_grads(&pos, &neg).0, pattern)
}

/// Loss of one batch; also accumulates parameter gradients into `grads`.
pub fn batch_loss_and_grads<T: Real>(
    p: &ModelParams<T>,
    features: &FeatureConfig,
    slope: f64,
    t: &Topology,
    inputs: &NodeInputs,
    batch: &TrainBatch,
    grads: Option<&mut ModelParams<T>>,
) -> T {
    let x = assemble_features(&p.embeddings, features, inputs);
    let (h, cache) = encode_forward(p, t, x, slope);
    let scorer = PairScorer::new(p, h.view());
    let pairs: Vec<(usize, usize)> = batch.positives.iter().chain(&batch.negatives).copied().collect();
    let logits: Vec<T> = pairs.iter().map(|&(i, j)| scorer.logit(i, j)).collect();
    let (pos, neg) = logits.split_at(batch.positives.len());
    let (loss, dpos, dneg) = loss_and_logit_grads(pos, neg);
    let Some(g) = grads else {
        return loss;
    };

    let width = p.dec1_w.nrows();
    let n = h.nrows();
    let mut dleft = Array2::<T>::zeros((n, width));
    let mut dright = Array2::<T>::zeros((n, width));
    let w2 = p.dec2_w.row(0);
    for (&(i, j), &dl) in pairs.iter().zip(dpos.iter().chain(&dneg)) {
        if dl == T::zero() {
            continue;
        }
        let pre = scorer.preactivation(i, j);
        g.dec2_b[[0, 0]] += dl;
        let mut dw2 = g.dec2_w.row_mut(0);
        let mut dpre = pre.clone();
        for k in 0..width {
            if pre[k] > T::zero() {
                dw2[k] += dl * pre[k];
                dpre[k] = dl * w2[k];
            } else {
                dpre[k] = T::zero();
            }
        }
        let mut db1 = g.dec1_b.row_mut(0);
        db1 += &dpre;
        let mut dl_row = dleft.row_mut(i);
        dl_row += &dpre;
        let mut dr_row = dright.row_mut(j);
        dr_row += &dpre;
    }
    {
        let (mut gl, mut gr) = g.dec1_w.multi_slice_mut((s![.., ..width], s![.., width..]));
        gl += &dleft.t().dot(&h);
        gr += &dright.t().dot(&h);
    }
    let dh = dleft.dot(&p.dec1_w.slice(s![.., ..width])) + dright.dot(&p.dec1_w.slice(s![.., width..]));
    let dx = encode_backward(p, &cache, slope, &dh, g);
    assemble_backward(features, inputs, dx.view(), &mut g.embeddings);
    loss
}
