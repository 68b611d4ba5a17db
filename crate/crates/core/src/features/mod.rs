//! Node features: centralities, community ids, position, language and word
//! identity, standardized and embedded into the encoder input.
//!
//! Block layout of an assembled node vector (default widths, 236 total):
//!
//! | block       | width | source                                   |
//! |-------------|-------|------------------------------------------|
//! | centrality  | 5 × 4 | z-scored scalar lifted by `z·w + b`      |
//! | community   | 2 × 32| GMC and LPC community embedding rows     |
//! | position    | 32    | position row, clamped at the last slot   |
//! | language    | 20    | language row                             |
//! | word        | 100   | word row, initialized from PPMI-SVD      |

mod assemble;
mod centrality;
mod standardize;
mod word_embeddings;

pub use assemble::{assemble_backward, assemble_features, FeatureEmbeddings};
pub use centrality::{centralities, Centralities};
pub use standardize::{FeatureStandardizer, StandardizeMode};
pub use word_embeddings::{train_word_embeddings, WordEmbeddingTable};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{detect, CommunityAlgorithm, LpcConfig};
use crate::graph::{AlignmentGraph, Lexicon};
use crate::{Error, Result};

/// Feature blocks that can be switched off for ablation studies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ablation {
    pub centrality: bool,
    pub community: bool,
    pub position: bool,
    pub language: bool,
    pub word: bool,
}

impl Ablation {
    /// Parses a comma list such as `centrality,language`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut a = Self::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "centrality" => a.centrality = true,
                "community" => a.community = true,
                "position" => a.position = true,
                "language" => a.language = true,
                "word" | "word-embedding" => a.word = true,
                other => return Err(Error::Config(format!("unknown feature block `{other}`"))),
            }
        }
        Ok(a)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (on, name) in [
            (self.centrality, "centrality"),
            (self.community, "community"),
            (self.position, "position"),
            (self.language, "language"),
            (self.word, "word"),
        ] {
            if on {
                v.push(name);
            }
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub centrality_dim: usize,
    pub community_dim: usize,
    /// Rows per community table; the last row collects overflowing ids.
    pub community_slots: usize,
    pub position_dim: usize,
    /// Rows of the position table; later positions share the last row.
    pub position_slots: usize,
    pub language_dim: usize,
    pub word_dim: usize,
    pub ablation: Ablation,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            centrality_dim: 4,
            community_dim: 32,
            community_slots: 256,
            position_dim: 32,
            position_slots: 160,
            language_dim: 20,
            word_dim: 100,
            ablation: Ablation::default(),
        }
    }
}

impl FeatureConfig {
    pub fn centrality_width(&self) -> usize {
        Centralities::COUNT * self.centrality_dim
    }

    pub fn community_width(&self) -> usize {
        2 * self.community_dim
    }

    /// Width of the assembled vector with ablated blocks removed.
    pub fn input_dim(&self) -> usize {
        let a = &self.ablation;
        [
            (a.centrality, self.centrality_width()),
            (a.community, self.community_width()),
            (a.position, self.position_dim),
            (a.language, self.language_dim),
            (a.word, self.word_dim),
        ]
        .iter()
        .filter(|(off, _)| !off)
        .map(|(_, w)| w)
        .sum()
    }
}

/// Language and word rows of the embedding tables. Unknown words map to the
/// UNK row, which is the last row of the word table.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabParts", into = "VocabParts")]
pub struct FeatureVocab {
    languages: Vec<String>,
    words: Vec<(String, String)>,
    language_index: HashMap<String, usize>,
    word_index: HashMap<(String, String), usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabParts {
    languages: Vec<String>,
    words: Vec<(String, String)>,
}

impl From<VocabParts> for FeatureVocab {
    fn from(p: VocabParts) -> Self {
        Self::new(p.languages, p.words)
    }
}

impl From<FeatureVocab> for VocabParts {
    fn from(v: FeatureVocab) -> Self {
        Self {
            languages: v.languages,
            words: v.words,
        }
    }
}

impl FeatureVocab {
    pub fn new(languages: Vec<String>, words: Vec<(String, String)>) -> Self {
        let language_index = languages.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let word_index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self {
            languages,
            words,
            language_index,
            word_index,
        }
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn words(&self) -> &[(String, String)] {
        &self.words
    }

    pub fn language_row(&self, code: &str) -> Result<usize> {
        self.language_index
            .get(code)
            .copied()
            .ok_or_else(|| Error::UnknownLanguage(code.to_owned()))
    }

    pub fn word_row(&self, lang: &str, word: &str) -> usize {
        self.word_index
            .get(&(lang.to_owned(), word.to_owned()))
            .copied()
            .unwrap_or(self.unk_row())
    }

    pub fn unk_row(&self) -> usize {
        self.words.len()
    }

    /// Word table rows including UNK.
    pub fn word_rows(&self) -> usize {
        self.words.len() + 1
    }
}

/// Raw per-node features of one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawNodeFeatures {
    pub centralities: Vec<[f64; 5]>,
    pub gmc: Vec<usize>,
    pub lpc: Vec<usize>,
}

/// Community-detection settings used for node features.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitySettings {
    pub gamma: f64,
    pub lpc: LpcConfig,
    pub seed: u64,
}

impl Default for CommunitySettings {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lpc: LpcConfig::default(),
            seed: 0,
        }
    }
}

/// Centralities and both community partitions. The LPC seed is derived from
/// `settings.seed` and the sentence id, so results do not depend on batch order.
pub fn raw_features(g: &AlignmentGraph, settings: &CommunitySettings) -> RawNodeFeatures {
    let seed = settings.seed ^ fnv1a(g.sentence_id().as_bytes());
    let gmc = detect(g, CommunityAlgorithm::Gmc, settings.gamma, seed, &settings.lpc);
    let lpc = detect(g, CommunityAlgorithm::Lpc, settings.gamma, seed, &settings.lpc);
    RawNodeFeatures {
        centralities: centralities(g.topology()).into_iter().map(Centralities::to_array).collect(),
        gmc: gmc.assignment().to_vec(),
        lpc: lpc.assignment().to_vec(),
    }
}

pub fn raw_features_batch(graphs: &[AlignmentGraph], settings: &CommunitySettings) -> Vec<RawNodeFeatures> {
    graphs.par_iter().map(|g| raw_features(g, settings)).collect()
}

/// Seed derivation for per-sentence randomness.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Lookup indices and standardized centralities of one node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeInput {
    pub z: [f64; 5],
    pub gmc_slot: usize,
    pub lpc_slot: usize,
    pub position_slot: usize,
    pub language_row: usize,
    pub word_row: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeInputs {
    pub nodes: Vec<NodeInput>,
}

impl NodeInputs {
    pub fn build(
        g: &AlignmentGraph,
        raw: &RawNodeFeatures,
        standardizer: &FeatureStandardizer,
        mode: StandardizeMode,
        lexicon: &Lexicon,
        vocab: &FeatureVocab,
        config: &FeatureConfig,
    ) -> Result<Self> {
        let local;
        let standardizer = match mode {
            StandardizeMode::Global => standardizer,
            StandardizeMode::PerGraph => {
                local = FeatureStandardizer::fit(&raw.centralities);
                &local
            }
        };
        let language_rows: Vec<usize> = g
            .languages()
            .iter()
            .map(|l| vocab.language_row(l))
            .collect::<Result<_>>()?;
        let slot = |c: usize| c.min(config.community_slots - 1);
        let nodes = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(u, node)| {
                let (lang, word) = lexicon.resolve(node.word_id);
                NodeInput {
                    z: standardizer.apply(&raw.centralities[u]),
                    gmc_slot: slot(raw.gmc[u]),
                    lpc_slot: slot(raw.lpc[u]),
                    position_slot: node.position.min(config.position_slots - 1),
                    language_row: language_rows[node.language],
                    word_row: vocab.word_row(lang, word),
                }
            })
            .collect();
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
