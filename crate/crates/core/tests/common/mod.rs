#![allow(dead_code)]

use mpwa_core::features::{FeatureConfig, NodeInput, NodeInputs};
use mpwa_core::graph::{AlignmentGraph, WordId};
use mpwa_core::{ModelConfig, ModelParams, Topology};
use rand::Rng;

pub const LANGUAGES: usize = 3;
pub const WORD_ROWS: usize = 12;

pub fn random_topology<R: Rng>(rng: &mut R, n: usize, p: f64) -> Topology {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Topology::from_edges(n, edges)
}

/// Sentence graph over `lengths.len()` languages with random cross-language edges.
pub fn random_sentence<R: Rng>(rng: &mut R, lengths: &[usize], p: f64) -> AlignmentGraph {
    let languages: Vec<String> = (0..lengths.len()).map(|i| format!("l{i}")).collect();
    let n: usize = lengths.iter().sum();
    let lang_of: Vec<usize> = lengths.iter().enumerate().flat_map(|(l, &k)| std::iter::repeat(l).take(k)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if lang_of[u] != lang_of[v] && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let words = (0..n).map(|i| WordId(i as u32)).collect();
    AlignmentGraph::from_parts("s", languages, lengths, words, edges).unwrap()
}

pub fn random_inputs<R: Rng>(rng: &mut R, n: usize, config: &FeatureConfig) -> NodeInputs {
    NodeInputs {
        nodes: (0..n)
            .map(|_| NodeInput {
                z: std::array::from_fn(|_| rng.gen_range(-2.0..2.0)),
                gmc_slot: rng.gen_range(0..4),
                lpc_slot: rng.gen_range(0..4),
                position_slot: rng.gen_range(0..config.position_slots),
                language_row: rng.gen_range(0..LANGUAGES),
                word_row: rng.gen_range(0..WORD_ROWS),
            })
            .collect(),
    }
}

pub fn small_config(hidden: usize) -> ModelConfig {
    ModelConfig {
        hidden,
        ..ModelConfig::default()
    }
}

pub fn random_params<R: Rng>(rng: &mut R, config: &ModelConfig) -> ModelParams<f64> {
    let mut p = ModelParams::<f64>::init(config, LANGUAGES, WORD_ROWS, None, rng);
    // Nonzero biases exercise their gradients too.
    for (name, t) in p.tensors_mut() {
        if name.ends_with(".b") {
            t.mapv_inplace(|_| rng.gen_range(-0.1..0.1));
        }
    }
    p
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

use std::collections::BTreeMap;

use mpwa_core::corpus_io::BilingualAlignmentSet;
use mpwa_core::graph::{build_graphs, Lexicon};
use mpwa_core::MultiParallelCorpus;

/// Planted corpus: each sentence is a sequence of concepts, language `k`
/// writes concept `c` as `k:c` and reverses the order in odd languages.
/// Alignments link every realization of a concept across all pairs, with
/// a share `drop` of links removed.
pub struct Planted {
    pub corpus: MultiParallelCorpus,
    pub alignments: Vec<BilingualAlignmentSet>,
    pub lexicon: Lexicon,
    pub graphs: Vec<AlignmentGraph>,
}

pub fn planted<R: Rng>(rng: &mut R, sentences: usize, languages: usize, concepts: usize, drop: f64) -> Planted {
    let langs: Vec<String> = (0..languages).map(|k| format!("x{k}")).collect();
    let mut per: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    let mut positions: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    for s in 0..sentences {
        let id = format!("s{s:04}");
        let len = rng.gen_range(3..7);
        let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..concepts)).collect();
        let mut pos_of = Vec::new();
        for (k, lang) in langs.iter().enumerate() {
            let order: Vec<usize> = if k % 2 == 1 { (0..len).rev().collect() } else { (0..len).collect() };
            let toks = order.iter().map(|&p| format!("{k}:{}", seq[p])).collect();
            per.entry(lang.clone()).or_default().insert(id.clone(), toks);
            // pos[p] = index of concept slot p in this language
            let mut pos = vec![0; len];
            for (i, &p) in order.iter().enumerate() {
                pos[p] = i;
            }
            pos_of.push(pos);
        }
        positions.insert(id, pos_of);
    }
    let corpus = MultiParallelCorpus::from_languages(per).unwrap().0;
    let mut alignments = Vec::new();
    for a in 0..languages {
        for b in a + 1..languages {
            let mut set = BilingualAlignmentSet::new(langs[a].clone(), langs[b].clone());
            for (id, pos) in &positions {
                let links = (0..pos[a].len())
                    .filter(|_| !rng.gen_bool(drop))
                    .map(|p| (pos[a][p], pos[b][p]))
                    .collect();
                set.links.insert(id.clone(), links);
            }
            alignments.push(set);
        }
    }
    let lexicon = Lexicon::from_corpus(&corpus);
    let graphs = build_graphs(&corpus, &alignments, &lexicon).unwrap();
    Planted {
        corpus,
        alignments,
        lexicon,
        graphs,
    }
}
