use ndarray::{s, Array2, ArrayView2};

use super::{Centralities, FeatureConfig, NodeInputs};
use crate::Real;

/// Learnable feature tables. Rows of ablated blocks stay zero because no
/// gradient ever reaches them.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureEmbeddings<T> {
    /// Per-centrality weight, shape (5, centrality_dim).
    pub centrality_w: Array2<T>,
    /// Per-centrality bias, shape (5, centrality_dim).
    pub centrality_b: Array2<T>,
    pub gmc: Array2<T>,
    pub lpc: Array2<T>,
    pub position: Array2<T>,
    pub language: Array2<T>,
    /// Word rows followed by the UNK row.
    pub word: Array2<T>,
}

impl<T: Real> FeatureEmbeddings<T> {
    pub fn zeros(config: &FeatureConfig, languages: usize, word_rows: usize) -> Self {
        Self {
            centrality_w: Array2::zeros((Centralities::COUNT, config.centrality_dim)),
            centrality_b: Array2::zeros((Centralities::COUNT, config.centrality_dim)),
            gmc: Array2::zeros((config.community_slots, config.community_dim)),
            lpc: Array2::zeros((config.community_slots, config.community_dim)),
            position: Array2::zeros((config.position_slots, config.position_dim)),
            language: Array2::zeros((languages, config.language_dim)),
            word: Array2::zeros((word_rows, config.word_dim)),
        }
    }

    pub fn tensors(&self) -> [(&'static str, &Array2<T>); 7] {
        [
            ("features.centrality_w", &self.centrality_w),
            ("features.centrality_b", &self.centrality_b),
            ("features.gmc", &self.gmc),
            ("features.lpc", &self.lpc),
            ("features.position", &self.position),
            ("features.language", &self.language),
            ("features.word", &self.word),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut Array2<T>); 7] {
        [
            ("features.centrality_w", &mut self.centrality_w),
            ("features.centrality_b", &mut self.centrality_b),
            ("features.gmc", &mut self.gmc),
            ("features.lpc", &mut self.lpc),
            ("features.position", &mut self.position),
            ("features.language", &mut self.language),
            ("features.word", &mut self.word),
        ]
    }
}

/// Builds the `(nodes, input_dim)` encoder input.
pub fn assemble_features<T: Real>(
    emb: &FeatureEmbeddings<T>,
    config: &FeatureConfig,
    inputs: &NodeInputs,
) -> Array2<T> {
    let mut x = Array2::zeros((inputs.len(), config.input_dim()));
    let a = &config.ablation;
    for (u, node) in inputs.nodes.iter().enumerate() {
        let mut row = x.row_mut(u);
        let mut off = 0;
        if !a.centrality {
            let d = config.centrality_dim;
            for k in 0..Centralities::COUNT {
                let z = T::from(node.z[k]).expect("finite z-score");
                for c in 0..d {
                    row[off + c] = z * emb.centrality_w[[k, c]] + emb.centrality_b[[k, c]];
                }
                off += d;
            }
        }
        let mut copy = |table: &Array2<T>, r: usize, off: &mut usize| {
            let w = table.ncols();
            row.slice_mut(s![*off..*off + w]).assign(&table.row(r));
            *off += w;
        };
        if !a.community {
            copy(&emb.gmc, node.gmc_slot, &mut off);
            copy(&emb.lpc, node.lpc_slot, &mut off);
        }
        if !a.position {
            copy(&emb.position, node.position_slot, &mut off);
        }
        if !a.language {
            copy(&emb.language, node.language_row, &mut off);
        }
        if !a.word {
            copy(&emb.word, node.word_row, &mut off);
        }
    }
    x
}

/// Scatters the input gradient `dx` into table gradients.
pub fn assemble_backward<T: Real>(
    config: &FeatureConfig,
    inputs: &NodeInputs,
    dx: ArrayView2<T>,
    grads: &mut FeatureEmbeddings<T>,
) {
    let a = &config.ablation;
    for (u, node) in inputs.nodes.iter().enumerate() {
        let row = dx.row(u);
        let mut off = 0;
        if !a.centrality {
            let d = config.centrality_dim;
            for k in 0..Centralities::COUNT {
                let z = T::from(node.z[k]).expect("finite z-score");
                for c in 0..d {
                    let g = row[off + c];
                    grads.centrality_w[[k, c]] += z * g;
                    grads.centrality_b[[k, c]] += g;
                }
                off += d;
            }
        }
        let add = |table: &mut Array2<T>, r: usize, off: &mut usize| {
            let w = table.ncols();
            let mut dst = table.row_mut(r);
            dst += &row.slice(s![*off..*off + w]);
            *off += w;
        };
        if !a.community {
            add(&mut grads.gmc, node.gmc_slot, &mut off);
            add(&mut grads.lpc, node.lpc_slot, &mut off);
        }
        if !a.position {
            add(&mut grads.position, node.position_slot, &mut off);
        }
        if !a.language {
            add(&mut grads.language, node.language_row, &mut off);
        }
        if !a.word {
            add(&mut grads.word, node.word_row, &mut off);
        }
    }
}
