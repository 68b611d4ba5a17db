//! Shared fixtures for the benchmarks: a synthetic corpus, its graphs and a
//! freshly initialized model.

use mpwa_cli::synth::{generate, SynthConfig};
use mpwa_core::corpus_io::MultiParallelCorpus;
use mpwa_core::features::{raw_features, CommunitySettings, FeatureStandardizer, FeatureVocab, NodeInputs, StandardizeMode};
use mpwa_core::graph::build_graphs;
use mpwa_core::{AlignmentGraph, Lexicon, ModelConfig, ModelParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub corpus: MultiParallelCorpus,
    pub lexicon: Lexicon,
    pub graphs: Vec<AlignmentGraph>,
}

/// `sentences` synthetic sentences over eight languages with default noise.
pub fn fixture(sentences: usize) -> Fixture {
    let cfg = SynthConfig {
        train_sentences: sentences,
        test_sentences: 0,
        ..SynthConfig::default()
    };
    let synth = generate(&cfg).expect("synthetic corpus");
    let (corpus, _) = MultiParallelCorpus::from_languages(synth.text).expect("corpus");
    let lexicon = Lexicon::from_corpus(&corpus);
    let graphs = build_graphs(&corpus, &synth.alignments, &lexicon).expect("graphs");
    Fixture { corpus, lexicon, graphs }
}

impl Fixture {
    /// The graph with the most nodes.
    pub fn largest(&self) -> &AlignmentGraph {
        self.graphs.iter().max_by_key(|g| g.node_count()).expect("non-empty fixture")
    }

    /// Model inputs for `g` with a vocabulary of the corpus languages and no words.
    pub fn inputs(&self, g: &AlignmentGraph, config: &ModelConfig) -> NodeInputs {
        let settings = CommunitySettings::default();
        let raw = raw_features(g, &settings);
        let standardizer = FeatureStandardizer::fit(raw.centralities.iter());
        let vocab = FeatureVocab::new(self.corpus.languages().to_vec(), Vec::new());
        NodeInputs::build(g, &raw, &standardizer, StandardizeMode::Global, &self.lexicon, &vocab, &config.features)
            .expect("node inputs")
    }

    pub fn params(&self, config: &ModelConfig) -> ModelParams<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        ModelParams::init(config, self.corpus.languages().len(), 1, None, &mut rng)
    }
}
