//! Graph-attention link predictor.
//!
//! The encoder is GAT → ReLU → GAT → ReLU → FC over the full sentence graph.
//! The decoder scores an ordered node pair as
//! `sigmoid(FC₂(ReLU(FC₁([h_i ‖ h_j]))))`. Gradients are written by hand for
//! every layer and verified against finite differences in 64-bit.

mod gradcheck;
mod layers;
mod loss;
mod negatives;
mod network;
mod optim;
mod params;
mod train;

pub use gradcheck::{finite_difference_check, finite_difference_check_kinked, relative_error, GradCheckOptions, GradCheckReport};
pub use layers::{gat_layer, gat_layer_backward, neighborhoods};
pub use loss::{loss, loss_and_logit_grads, sigmoid, LOSS_EPS};
pub use negatives::{sample_graph_negatives, sample_negatives};
pub use network::{batch_loss_and_grads, batch_loss_with_pattern, decode_pair, encode, PairScorer, TrainBatch};
pub use optim::AdamW;
pub use params::{ModelConfig, ModelParams};
pub use train::{sentence_batches, subsample, train, TrainConfig, TrainReport};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus_io::MultiParallelCorpus;
use crate::features::{
    raw_features, raw_features_batch, train_word_embeddings, CommunitySettings, FeatureStandardizer,
    FeatureVocab, NodeInputs, RawNodeFeatures, StandardizeMode,
};
use crate::graph::{AlignmentGraph, Lexicon};
use crate::{Error, Result};

/// A trained model with everything needed to featurize unseen sentences.
#[derive(Clone, Debug, PartialEq)]
pub struct GnnModel {
    pub config: ModelConfig,
    pub params: ModelParams<f32>,
    pub standardizer: FeatureStandardizer,
    pub standardize_mode: StandardizeMode,
    pub community: CommunitySettings,
    pub vocab: FeatureVocab,
}

/// Everything `GnnModel::fit` needs besides the data.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FitConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub community: CommunitySettings,
    pub standardize_mode: StandardizeMode,
}

impl GnnModel {
    /// Subsamples the training graphs, fits word embeddings on `corpus`,
    /// fits the standardizer, initializes and trains the parameters.
    /// `lexicon` resolves the word ids of `graphs`.
    pub fn fit(
        graphs: &[AlignmentGraph],
        lexicon: &Lexicon,
        corpus: &MultiParallelCorpus,
        fc: &FitConfig,
        on_batch: impl FnMut(usize, f32),
    ) -> Result<(Self, TrainReport)> {
        let picked: Vec<AlignmentGraph> = subsample(graphs.len(), fc.train.train_sample, fc.train.seed)
            .into_iter()
            .map(|i| graphs[i].clone())
            .collect();
        let raw = raw_features_batch(&picked, &fc.community);
        Self::fit_prepared(&picked, &raw, lexicon, corpus, fc, on_batch)
    }

    /// As [`GnnModel::fit`] with raw features already computed for every
    /// graph (`raw[k]` belongs to `graphs[k]`).
    pub fn fit_with_features(
        graphs: &[AlignmentGraph],
        raw: &[RawNodeFeatures],
        lexicon: &Lexicon,
        corpus: &MultiParallelCorpus,
        fc: &FitConfig,
        on_batch: impl FnMut(usize, f32),
    ) -> Result<(Self, TrainReport)> {
        if graphs.len() != raw.len() {
            return Err(Error::Config(format!("{} graphs but {} feature sets", graphs.len(), raw.len())));
        }
        let idx = subsample(graphs.len(), fc.train.train_sample, fc.train.seed);
        let picked: Vec<AlignmentGraph> = idx.iter().map(|&i| graphs[i].clone()).collect();
        let raw: Vec<RawNodeFeatures> = idx.iter().map(|&i| raw[i].clone()).collect();
        Self::fit_prepared(&picked, &raw, lexicon, corpus, fc, on_batch)
    }

    fn fit_prepared(
        picked: &[AlignmentGraph],
        raw: &[RawNodeFeatures],
        lexicon: &Lexicon,
        corpus: &MultiParallelCorpus,
        fc: &FitConfig,
        on_batch: impl FnMut(usize, f32),
    ) -> Result<(Self, TrainReport)> {
        if picked.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let corpus_lexicon = Lexicon::from_corpus(corpus);
        let table = train_word_embeddings(corpus, &corpus_lexicon, fc.model.features.word_dim, fc.train.seed);
        let vocab = FeatureVocab::new(corpus.languages().to_vec(), table.words.clone());
        let standardizer = FeatureStandardizer::fit(raw.iter().flat_map(|r| r.centralities.iter()));
        let inputs = picked
            .iter()
            .zip(raw)
            .map(|(g, r)| {
                NodeInputs::build(g, r, &standardizer, fc.standardize_mode, lexicon, &vocab, &fc.model.features)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(fc.train.seed);
        let mut params = ModelParams::init(
            &fc.model,
            vocab.languages().len(),
            vocab.word_rows(),
            Some(&table.vectors),
            &mut rng,
        );
        let report = train(picked, &inputs, &fc.model, &mut params, &fc.train, on_batch)?;
        let model = Self {
            config: fc.model,
            params,
            standardizer,
            standardize_mode: fc.standardize_mode,
            community: fc.community,
            vocab,
        };
        Ok((model, report))
    }

    pub fn node_inputs(&self, g: &AlignmentGraph, lexicon: &Lexicon) -> Result<NodeInputs> {
        let raw = raw_features(g, &self.community);
        NodeInputs::build(
            g,
            &raw,
            &self.standardizer,
            self.standardize_mode,
            lexicon,
            &self.vocab,
            &self.config.features,
        )
    }

    /// Hidden states of every node of `g`.
    pub fn encode(&self, g: &AlignmentGraph, lexicon: &Lexicon) -> Result<Array2<f32>> {
        let inputs = self.node_inputs(g, lexicon)?;
        Ok(encode(
            &self.params,
            &self.config.features,
            self.config.leaky_slope,
            g.topology(),
            &inputs,
        ))
    }

    pub fn encode_all(&self, graphs: &[AlignmentGraph], lexicon: &Lexicon) -> Result<Vec<Array2<f32>>> {
        graphs.par_iter().map(|g| self.encode(g, lexicon)).collect()
    }

    /// Parameter shapes this model's configuration implies.
    pub fn expected_params(&self) -> ModelParams<f32> {
        ModelParams::zeros(&self.config, self.vocab.languages().len(), self.vocab.word_rows())
    }
}
