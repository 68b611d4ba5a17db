//! Sentence-id word embeddings: a PPMI-weighted (word type × sentence id)
//! occurrence matrix factorized by a rank-k truncated SVD.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus_io::MultiParallelCorpus;
use crate::graph::Lexicon;

/// Embedding rows in lexicon order.
#[derive(Clone, Debug, PartialEq)]
pub struct WordEmbeddingTable {
    pub words: Vec<(String, String)>,
    pub vectors: Array2<f32>,
}

impl WordEmbeddingTable {
    /// `lang word v1 .. vk` lines, tab separated.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ((lang, word), row) in self.words.iter().zip(self.vectors.rows()) {
            let _ = write!(out, "{lang}\t{word}");
            for v in row {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Sparse row-major matrix.
pub(crate) struct SparseRows {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub cols: usize,
}

impl SparseRows {
    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows.len(), x.ncols());
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                for k in 0..x.ncols() {
                    out[(r, k)] += v * x[(c, k)];
                }
            }
        }
        out
    }

    fn tr_mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.cols, x.ncols());
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                for k in 0..x.ncols() {
                    out[(c, k)] += v * x[(r, k)];
                }
            }
        }
        out
    }
}

/// Binary occurrence of each lexicon entry in each sentence, PPMI weighted.
pub(crate) fn ppmi_matrix(corpus: &MultiParallelCorpus, lexicon: &Lexicon) -> SparseRows {
    let mut occurrences: Vec<Vec<usize>> = vec![Vec::new(); lexicon.len()];
    let sentence_ids: BTreeMap<&str, usize> = corpus
        .sentences()
        .keys()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    for (id, sentence) in corpus.sentences() {
        let col = sentence_ids[id.as_str()];
        for (lang, tokens) in sentence {
            for t in tokens {
                if let Some(w) = lexicon.get(lang, t) {
                    let occ = &mut occurrences[w.0 as usize];
                    if occ.last() != Some(&col) {
                        occ.push(col);
                    }
                }
            }
        }
    }
    for occ in &mut occurrences {
        occ.sort_unstable();
        occ.dedup();
    }
    let cols = sentence_ids.len();
    let mut col_sum = vec![0.0f64; cols];
    let mut total = 0.0;
    for occ in &occurrences {
        for &c in occ {
            col_sum[c] += 1.0;
            total += 1.0;
        }
    }
    let rows = occurrences
        .iter()
        .map(|occ| {
            let row_sum = occ.len() as f64;
            occ.iter()
                .filter_map(|&c| {
                    let pmi = (total / (row_sum * col_sum[c])).ln();
                    (pmi > 0.0).then_some((c, pmi))
                })
                .collect()
        })
        .collect();
    SparseRows { rows, cols }
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Top right singular vectors and values of `m` by randomized subspace iteration.
pub(crate) fn truncated_svd(m: &SparseRows, rank: usize, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    const OVERSAMPLE: usize = 10;
    const POWER_ITERATIONS: usize = 4;
    let width = (rank + OVERSAMPLE).min(m.rows.len()).min(m.cols);
    if width == 0 {
        return (Vec::new(), DMatrix::zeros(m.cols, 0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(m.cols, width, |_, _| rng.gen_range(-1.0..1.0));
    let mut q = orthonormalize(m.mul_dense(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormalize(m.tr_mul_dense(&q));
        q = orthonormalize(m.mul_dense(&z));
    }
    // B = Qᵀ M, so Bᵀ = Mᵀ Q; the SVD of Bᵀ gives M's right singular vectors as its left ones.
    let bt = m.tr_mul_dense(&q);
    let svd = bt.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    idx.truncate(rank);
    let values = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = DMatrix::from_fn(m.cols, idx.len(), |r, c| u[(r, idx[c])]);
    (values, vectors)
}

/// Embeddings `U Σ^½` of the PPMI matrix, computed as `M V Σ^-½` so that rows
/// with identical occurrence patterns get identical vectors. Missing rank is
/// padded with zero columns.
pub fn train_word_embeddings(
    corpus: &MultiParallelCorpus,
    lexicon: &Lexicon,
    dim: usize,
    seed: u64,
) -> WordEmbeddingTable {
    let m = ppmi_matrix(corpus, lexicon);
    let (values, right) = truncated_svd(&m, dim, seed);
    let mut vectors = Array2::<f32>::zeros((lexicon.len(), dim));
    for (r, row) in m.rows.iter().enumerate() {
        for (k, &sigma) in values.iter().enumerate() {
            if sigma <= 1e-10 {
                continue;
            }
            let dot: f64 = row.iter().map(|&(c, v)| v * right[(c, k)]).sum();
            vectors[[r, k]] = (dot / sigma.sqrt()) as f32;
        }
    }
    WordEmbeddingTable {
        words: lexicon.entries().to_vec(),
        vectors,
    }
}
