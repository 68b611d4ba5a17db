//! Multiparallel word alignment.
//!
//! Bilingual alignments for every language pair of a multiparallel sentence are
//! merged into one alignment graph. Community detection exposes concept
//! clusters, a graph-attention link predictor is trained over node features,
//! and symmetrized bilingual alignments are induced from its score matrices.
//!
//! The crate is organized bottom-up:
//!
//! - [`corpus_io`]: corpus, Pharaoh, gold, POS and checkpoint formats
//! - [`graph`]: per-sentence alignment graphs
//! - [`community`]: modularity, greedy modularity and label propagation
//! - [`features`]: centralities, standardization, word embeddings, node inputs
//! - [`gnn`]: encoder, decoder, loss, optimizer and training loop
//! - [`inference`]: score matrices, thresholding and grow-diag-final-and
//! - [`eval`]: precision, recall, F1 and AER
//! - [`projection`]: POS annotation projection

pub mod community;
pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod features;
pub mod gnn;
pub mod graph;
pub mod inference;
mod num;
pub mod projection;

use std::collections::BTreeSet;

pub use error::{Error, Result};
pub use num::Real;

/// A link between token `i` of the first and token `j` of the second sentence.
pub type Link = (usize, usize);

/// Links of one sentence for one language pair.
pub type LinkSet = BTreeSet<Link>;

pub use community::{gmc, lpc, modularity, refine_edges, CommunityAlgorithm, LpcConfig, Partition};
pub use corpus_io::{
    BilingualAlignmentSet, Checkpoint, GoldAlignment, GoldLinks, MultiParallelCorpus,
    PosTaggedCorpus,
};
pub use features::{Ablation, FeatureConfig, FeatureStandardizer, FeatureVocab, NodeInputs};
pub use gnn::{FitConfig, GnnModel, ModelConfig, ModelParams, TrainConfig};
pub use graph::{connected_components, AlignmentGraph, Lexicon, Topology};
pub use inference::{gdfa, tgdfa, tgdfa_plus_orig, ScoreMatrix, ScoreMode};
