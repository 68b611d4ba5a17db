//! Planted multiparallel corpus generator.
//!
//! Every sentence is a sequence of distinct concepts drawn from a Zipfian
//! distribution. Each language writes a concept with its own word form and
//! reorders the sequence with its own permutation rule, so the true
//! alignment of every language pair is known. Input alignments are the true
//! links with a share dropped and random wrong links added.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use mpwa_core::corpus_io::{write_gold, write_pharaoh, BilingualAlignmentSet, GoldAlignment, GoldLinks};
use mpwa_core::LinkSet;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub train_sentences: usize,
    pub test_sentences: usize,
    pub languages: usize,
    /// Number of concepts.
    pub vocab: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub edge_drop: f64,
    pub edge_noise: f64,
    /// Extra drop rate for links of concepts in the rarest quarter.
    pub rare_drop: f64,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            train_sentences: 2000,
            test_sentences: 200,
            languages: 8,
            vocab: 400,
            min_len: 5,
            max_len: 15,
            edge_drop: 0.3,
            edge_noise: 0.05,
            rare_drop: 0.0,
            zipf_exponent: 1.0,
            seed: 0,
        }
    }
}

/// Generated data, in memory.
#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub languages: Vec<String>,
    /// Per language, sentence id → tokens.
    pub text: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Per language, sentence id → UPOS tags.
    pub tags: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    /// Noisy input alignments for every pair `a < b`.
    pub alignments: Vec<BilingualAlignmentSet>,
    /// True links of every pair.
    pub truth: Vec<BilingualAlignmentSet>,
    /// Concepts of each sentence, in canonical order.
    pub concepts: BTreeMap<String, Vec<usize>>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Code of language `k`; the first two form the evaluation pair.
pub fn language_code(k: usize) -> String {
    format!("l{k:02}")
}

pub const DESIGNATED_PAIR: (&str, &str) = ("l00", "l01");

const SYLLABLES: [&str; 20] = [
    "ka", "lo", "mi", "ne", "su", "ta", "ri", "po", "ve", "du", "sha", "gri", "ol", "en", "ua", "bi", "zo", "che",
    "fa", "ny",
];

const TAG_CYCLE: [&str; 8] = ["NOUN", "VERB", "ADJ", "NOUN", "ADP", "DET", "ADV", "PRON"];

/// Position of canonical slot `p` in language `k` for a sentence of length `n`.
fn permutation(k: usize, n: usize) -> Vec<usize> {
    let order: Vec<usize> = match k % 5 {
        0 => (0..n).collect(),
        1 => (0..n).rev().collect(),
        2 => (0..n).map(|i| if i % 2 == 0 { (i + 1).min(n - 1) } else { i - 1 }).collect(),
        3 => (0..n).map(|i| (i + 1) % n).collect(),
        _ => {
            let h = n / 2;
            (h..n).chain(0..h).collect()
        }
    };
    // `order` lists canonical slots in surface order; invert it.
    let mut pos = vec![0; n];
    for (surface, &slot) in order.iter().enumerate() {
        pos[slot] = surface;
    }
    pos
}

fn word_forms<R: Rng>(rng: &mut R, vocab: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    (0..vocab)
        .map(|c| loop {
            let syl = rng.gen_range(2..4);
            let mut w: String = (0..syl).map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())]).collect();
            if !seen.insert(w.clone()) {
                write!(w, "{c}").unwrap();
                if !seen.insert(w.clone()) {
                    continue;
                }
            }
            break w;
        })
        .collect()
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    ensure!((0.0..=1.0).contains(&cfg.edge_drop), "edge_drop must lie in [0, 1]");
    ensure!((0.0..=1.0).contains(&cfg.edge_noise), "edge_noise must lie in [0, 1]");
    ensure!((0.0..=1.0).contains(&cfg.rare_drop), "rare_drop must lie in [0, 1]");
    ensure!(cfg.languages >= 2, "at least two languages are needed");
    ensure!(cfg.min_len >= 1 && cfg.min_len <= cfg.max_len, "need 1 <= min_len <= max_len");
    ensure!(cfg.max_len <= cfg.vocab, "sentences hold distinct concepts, so max_len <= vocab");

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let languages: Vec<String> = (0..cfg.languages).map(language_code).collect();
    let forms: Vec<Vec<String>> = (0..cfg.languages).map(|_| word_forms(&mut rng, cfg.vocab)).collect();
    let zipf = WeightedIndex::new((1..=cfg.vocab).map(|r| 1.0 / (r as f64).powf(cfg.zipf_exponent)))
        .context("zipf weights")?;
    let rare_from = cfg.vocab - cfg.vocab / 4;

    let total = cfg.train_sentences + cfg.test_sentences;
    let ids: Vec<String> = (0..total).map(|s| format!("s{s:05}")).collect();
    let mut out = SynthCorpus {
        languages: languages.clone(),
        text: BTreeMap::new(),
        tags: BTreeMap::new(),
        alignments: Vec::new(),
        truth: Vec::new(),
        concepts: BTreeMap::new(),
        train_ids: ids[..cfg.train_sentences].to_vec(),
        test_ids: ids[cfg.train_sentences..].to_vec(),
    };
    let mut positions: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
    for id in &ids {
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let mut seq: Vec<usize> = Vec::with_capacity(len);
        while seq.len() < len {
            let c = zipf.sample(&mut rng);
            if !seq.contains(&c) {
                seq.push(c);
            }
        }
        let mut per_lang = Vec::with_capacity(cfg.languages);
        for (k, lang) in languages.iter().enumerate() {
            let pos = permutation(k, len);
            let mut toks = vec![String::new(); len];
            let mut tags = vec![String::new(); len];
            for (slot, &c) in seq.iter().enumerate() {
                toks[pos[slot]] = forms[k][c].clone();
                tags[pos[slot]] = TAG_CYCLE[c % TAG_CYCLE.len()].to_owned();
            }
            out.text.entry(lang.clone()).or_default().insert(id.clone(), toks);
            out.tags.entry(lang.clone()).or_default().insert(id.clone(), tags);
            per_lang.push(pos);
        }
        positions.insert(id.clone(), per_lang);
        out.concepts.insert(id.clone(), seq);
    }

    for a in 0..cfg.languages {
        for b in a + 1..cfg.languages {
            let mut noisy = BilingualAlignmentSet::new(languages[a].clone(), languages[b].clone());
            let mut truth = noisy.clone();
            for id in &ids {
                let pos = &positions[id];
                let seq = &out.concepts[id];
                let n = seq.len();
                let gold: LinkSet = (0..n).map(|slot| (pos[a][slot], pos[b][slot])).collect();
                let mut links = LinkSet::new();
                for slot in 0..n {
                    let drop = if seq[slot] >= rare_from {
                        1.0 - (1.0 - cfg.edge_drop) * (1.0 - cfg.rare_drop)
                    } else {
                        cfg.edge_drop
                    };
                    if !rng.gen_bool(drop) {
                        links.insert((pos[a][slot], pos[b][slot]));
                    }
                }
                if n >= 2 {
                    for _ in 0..n {
                        if rng.gen_bool(cfg.edge_noise) {
                            let wrong = loop {
                                let p = (rng.gen_range(0..n), rng.gen_range(0..n));
                                if !gold.contains(&p) {
                                    break p;
                                }
                            };
                            links.insert(wrong);
                        }
                    }
                }
                noisy.links.insert(id.clone(), links);
                truth.links.insert(id.clone(), gold);
            }
            out.alignments.push(noisy);
            out.truth.push(truth);
        }
    }
    Ok(out)
}

impl SynthCorpus {
    pub fn truth_of(&self, a: &str, b: &str) -> Option<&BilingualAlignmentSet> {
        self.truth.iter().find(|s| s.lang_pair.0 == a && s.lang_pair.1 == b)
    }

    /// Gold of the designated pair over `ids`; every link is sure.
    pub fn gold(&self, ids: &[String]) -> GoldAlignment {
        let truth = self
            .truth_of(DESIGNATED_PAIR.0, DESIGNATED_PAIR.1)
            .expect("designated pair exists");
        GoldAlignment {
            sentences: ids
                .iter()
                .map(|id| (id.clone(), GoldLinks::new(truth.links[id].clone(), LinkSet::new())))
                .collect(),
        }
    }

    /// Writes `corpus/<lang>.txt`, `align/<a>-<b>.align`, `pos/<lang>.pos`,
    /// `gold/<a>-<b>.gold` (designated pair, test sentences), `train.ids`
    /// and `test.ids` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for sub in ["corpus", "align", "pos", "gold"] {
            std::fs::create_dir_all(dir.join(sub)).with_context(|| format!("creating {}", dir.join(sub).display()))?;
        }
        let write = |path: &Path, text: &str| {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        };
        for (lang, sentences) in &self.text {
            let mut txt = String::new();
            let mut pos = String::new();
            for (id, toks) in sentences {
                writeln!(txt, "{id}\t{}", toks.join(" ")).unwrap();
                let tags = &self.tags[lang][id];
                let pairs: Vec<String> = toks.iter().zip(tags).map(|(t, g)| format!("{t}/{g}")).collect();
                writeln!(pos, "{id}\t{}", pairs.join(" ")).unwrap();
            }
            write(&dir.join("corpus").join(format!("{lang}.txt")), &txt)?;
            write(&dir.join("pos").join(format!("{lang}.pos")), &pos)?;
        }
        for set in &self.alignments {
            let name = format!("{}-{}.align", set.lang_pair.0, set.lang_pair.1);
            write(&dir.join("align").join(name), &write_pharaoh(set))?;
        }
        let (a, b) = DESIGNATED_PAIR;
        write(&dir.join("gold").join(format!("{a}-{b}.gold")), &write_gold(&self.gold(&self.test_ids)))?;
        write(&dir.join("train.ids"), &(self.train_ids.join("\n") + "\n"))?;
        write(&dir.join("test.ids"), &(self.test_ids.join("\n") + "\n"))?;
        Ok(())
    }
}
