use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureConfig, FeatureEmbeddings};
use crate::{Error, Real, Result};

/// Architecture hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub features: FeatureConfig,
    pub hidden: usize,
    /// Negative slope of the attention LeakyReLU.
    pub leaky_slope: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            hidden: 512,
            leaky_slope: 0.2,
        }
    }
}

/// All learnable tensors. Linear weights are stored `(out, in)` and vectors as
/// single-row matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub embeddings: FeatureEmbeddings<T>,
    pub gat1_w: Array2<T>,
    /// Attention vector `[a_src ‖ a_dst]`, shape (1, 2·hidden).
    pub gat1_a: Array2<T>,
    pub gat2_w: Array2<T>,
    pub gat2_a: Array2<T>,
    pub enc_w: Array2<T>,
    pub enc_b: Array2<T>,
    pub dec1_w: Array2<T>,
    pub dec1_b: Array2<T>,
    pub dec2_w: Array2<T>,
    pub dec2_b: Array2<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn zeros(config: &ModelConfig, languages: usize, word_rows: usize) -> Self {
        let h = config.hidden;
        let d = config.features.input_dim();
        Self {
            embeddings: FeatureEmbeddings::zeros(&config.features, languages, word_rows),
            gat1_w: Array2::zeros((h, d)),
            gat1_a: Array2::zeros((1, 2 * h)),
            gat2_w: Array2::zeros((h, h)),
            gat2_a: Array2::zeros((1, 2 * h)),
            enc_w: Array2::zeros((h, h)),
            enc_b: Array2::zeros((1, h)),
            dec1_w: Array2::zeros((h, 2 * h)),
            dec1_b: Array2::zeros((1, h)),
            dec2_w: Array2::zeros((1, h)),
            dec2_b: Array2::zeros((1, 1)),
        }
    }

    /// Glorot-uniform weights and zero biases. Tables of ablated feature
    /// blocks stay zero. `word_init` replaces the word rows it covers.
    pub fn init<R: Rng>(
        config: &ModelConfig,
        languages: usize,
        word_rows: usize,
        word_init: Option<&Array2<f32>>,
        rng: &mut R,
    ) -> Self {
        let mut p = Self::zeros(config, languages, word_rows);
        let ab = config.features.ablation;
        let skip = |name: &str| match name {
            "features.centrality_w" | "features.centrality_b" => ab.centrality,
            "features.gmc" | "features.lpc" => ab.community,
            "features.position" => ab.position,
            "features.language" => ab.language,
            "features.word" => ab.word,
            _ => false,
        };
        for (name, t) in p.tensors_mut() {
            if is_bias(name) || skip(name) {
                continue;
            }
            let (rows, cols) = t.dim();
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            t.mapv_inplace(|_| T::from(rng.gen_range(-bound..bound)).unwrap());
        }
        if let (Some(init), false) = (word_init, ab.word) {
            let rows = init.nrows().min(word_rows);
            let cols = init.ncols().min(config.features.word_dim);
            for r in 0..rows {
                for c in 0..cols {
                    p.embeddings.word[[r, c]] = T::from(init[[r, c]]).unwrap();
                }
            }
        }
        p
    }

    pub fn tensors(&self) -> Vec<(&'static str, &Array2<T>)> {
        let mut v = self.embeddings.tensors().to_vec();
        v.extend([
            ("gat1.w", &self.gat1_w),
            ("gat1.a", &self.gat1_a),
            ("gat2.w", &self.gat2_w),
            ("gat2.a", &self.gat2_a),
            ("encoder.fc.w", &self.enc_w),
            ("encoder.fc.b", &self.enc_b),
            ("decoder.fc1.w", &self.dec1_w),
            ("decoder.fc1.b", &self.dec1_b),
            ("decoder.fc2.w", &self.dec2_w),
            ("decoder.fc2.b", &self.dec2_b),
        ]);
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Array2<T>)> {
        let mut v: Vec<_> = self.embeddings.tensors_mut().into_iter().collect();
        v.extend([
            ("gat1.w", &mut self.gat1_w),
            ("gat1.a", &mut self.gat1_a),
            ("gat2.w", &mut self.gat2_w),
            ("gat2.a", &mut self.gat2_a),
            ("encoder.fc.w", &mut self.enc_w),
            ("encoder.fc.b", &mut self.enc_b),
            ("decoder.fc1.w", &mut self.dec1_w),
            ("decoder.fc1.b", &mut self.dec1_b),
            ("decoder.fc2.w", &mut self.dec2_w),
            ("decoder.fc2.b", &mut self.dec2_b),
        ]);
        v
    }

    /// Zero tensors of the same shapes.
    pub fn zeros_like(&self) -> Self {
        self.map(|t| Array2::zeros(t.raw_dim()))
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        self.map(|t| t.mapv(|x| U::from(x).unwrap()))
    }

    fn map<U>(&self, f: impl Fn(&Array2<T>) -> Array2<U>) -> ModelParams<U> {
        let e = &self.embeddings;
        ModelParams {
            embeddings: FeatureEmbeddings {
                centrality_w: f(&e.centrality_w),
                centrality_b: f(&e.centrality_b),
                gmc: f(&e.gmc),
                lpc: f(&e.lpc),
                position: f(&e.position),
                language: f(&e.language),
                word: f(&e.word),
            },
            gat1_w: f(&self.gat1_w),
            gat1_a: f(&self.gat1_a),
            gat2_w: f(&self.gat2_w),
            gat2_a: f(&self.gat2_a),
            enc_w: f(&self.enc_w),
            enc_b: f(&self.enc_b),
            dec1_w: f(&self.dec1_w),
            dec1_b: f(&self.dec1_b),
            dec2_w: f(&self.dec2_w),
            dec2_b: f(&self.dec2_b),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|x| x.is_finite()))
    }

    /// Fails with the first tensor whose shape differs from `expected`.
    pub fn check_shapes(&self, expected: &Self) -> Result<()> {
        for ((name, a), (_, b)) in self.tensors().into_iter().zip(expected.tensors()) {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch {
                    name: name.to_owned(),
                    expected: b.shape().to_vec(),
                    found: a.shape().to_vec(),
                });
            }
        }
        Ok(())
    }
}

fn is_bias(name: &str) -> bool {
    name.ends_with(".b") || name == "features.centrality_b"
}
