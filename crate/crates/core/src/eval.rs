//! Precision, recall, F1 and AER against sure/possible gold links, with
//! micro-averaging over sentences.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::community::{detect, refine_edges, CommunityAlgorithm, LpcConfig};
use crate::corpus_io::{GoldAlignment, GoldLinks, MultiParallelCorpus};
use crate::graph::AlignmentGraph;
use crate::{Error, LinkSet, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// |A|
    pub predicted: usize,
    /// |S|
    pub sure: usize,
    /// |A ∩ S|
    pub hit_sure: usize,
    /// |A ∩ P|
    pub hit_possible: usize,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, o: Counts) -> Counts {
        Counts {
            predicted: self.predicted + o.predicted,
            sure: self.sure + o.sure,
            hit_sure: self.hit_sure + o.hit_sure,
            hit_possible: self.hit_possible + o.hit_possible,
        }
    }
}

impl Counts {
    pub fn of(predicted: &LinkSet, gold: &GoldLinks) -> Self {
        Self {
            predicted: predicted.len(),
            sure: gold.sure.len(),
            hit_sure: predicted.intersection(&gold.sure).count(),
            hit_possible: predicted.intersection(&gold.possible).count(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub aer: f64,
    /// Set when nothing was predicted; precision is then 1 by convention.
    pub empty_prediction: bool,
    pub sentences: usize,
    /// Mean of per-sentence F1.
    pub macro_f1: f64,
}

impl EvalReport {
    /// Ratios of micro-aggregated counts. An empty sure set gives recall 1,
    /// and AER 0 when the prediction is empty too.
    pub fn from_counts(c: Counts) -> Self {
        let precision = if c.predicted == 0 {
            1.0
        } else {
            c.hit_possible as f64 / c.predicted as f64
        };
        let recall = if c.sure == 0 {
            1.0
        } else {
            c.hit_sure as f64 / c.sure as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let denom = c.predicted + c.sure;
        let aer = if denom == 0 {
            0.0
        } else {
            1.0 - (c.hit_sure + c.hit_possible) as f64 / denom as f64
        };
        Self {
            counts: c,
            precision,
            recall,
            f1,
            aer,
            empty_prediction: c.predicted == 0,
            sentences: 0,
            macro_f1: f1,
        }
    }

    pub fn tsv_header() -> &'static str {
        "method\tP\tR\tF1\tAER"
    }

    pub fn tsv_row(&self, method: &str) -> String {
        format!(
            "{method}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            self.precision, self.recall, self.f1, self.aer
        )
    }
}

/// Scores every sentence of `predicted`; each must have gold.
pub fn score(predicted: &BTreeMap<String, LinkSet>, gold: &GoldAlignment) -> Result<EvalReport> {
    let per: Vec<Counts> = predicted
        .iter()
        .map(|(id, links)| {
            gold.sentences
                .get(id)
                .map(|g| Counts::of(links, g))
                .ok_or_else(|| Error::MissingGold(id.clone()))
        })
        .collect::<Result<_>>()?;
    let total = per.iter().fold(Counts::default(), |a, &c| a + c);
    let mut report = EvalReport::from_counts(total);
    report.sentences = per.len();
    if !per.is_empty() {
        report.macro_f1 = per.iter().map(|&c| EvalReport::from_counts(c).f1).sum::<f64>() / per.len() as f64;
    }
    Ok(report)
}

/// Bin (0 = most frequent) of each word type of `lang` by corpus frequency.
/// Types ranked by descending frequency are cut into `bins` equal quantile
/// ranges; a type takes the bin of the first rank holding its frequency, so
/// tied types share the higher-frequency bin.
pub fn frequency_bin_of_types(corpus: &MultiParallelCorpus, lang: &str, bins: usize) -> HashMap<String, usize> {
    let mut freq: HashMap<String, usize> = HashMap::new();
    for sentence in corpus.sentences().values() {
        for tok in sentence.get(lang).into_iter().flatten() {
            *freq.entry(tok.clone()).or_default() += 1;
        }
    }
    let mut sorted: Vec<usize> = freq.values().copied().collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let types = sorted.len();
    freq.into_iter()
        .map(|(w, f)| {
            let rank = sorted.partition_point(|&g| g > f);
            (w, rank * bins / types)
        })
        .collect()
}

/// Per-bin scores; a link belongs to the bin of its source token. Bins with
/// neither predicted nor gold links are `None`.
pub fn frequency_bins(
    predicted: &BTreeMap<String, LinkSet>,
    gold: &GoldAlignment,
    corpus: &MultiParallelCorpus,
    source_lang: &str,
    bins: usize,
) -> Result<Vec<Option<EvalReport>>> {
    let bin_of = frequency_bin_of_types(corpus, source_lang, bins);
    let mut totals = vec![Counts::default(); bins.max(1)];
    for (id, links) in predicted {
        let g = gold.sentences.get(id).ok_or_else(|| Error::MissingGold(id.clone()))?;
        let tokens = corpus
            .sentence(id)
            .and_then(|s| s.get(source_lang))
            .ok_or_else(|| Error::MissingLanguage {
                sentence: id.clone(),
                lang: source_lang.to_owned(),
            })?;
        let bin = |i: usize| tokens.get(i).and_then(|t| bin_of.get(t)).copied().unwrap_or(bins - 1);
        let split = |set: &LinkSet| {
            let mut parts = vec![LinkSet::new(); bins];
            for &(i, j) in set {
                parts[bin(i)].insert((i, j));
            }
            parts
        };
        let (p, s, pp) = (split(links), split(&g.sure), split(&g.possible));
        for b in 0..bins {
            let gl = GoldLinks {
                sure: s[b].clone(),
                possible: pp[b].clone(),
            };
            totals[b] = totals[b] + Counts::of(&p[b], &gl);
        }
    }
    Ok(totals
        .into_iter()
        .map(|c| (c.predicted + c.sure > 0).then(|| EvalReport::from_counts(c)))
        .collect())
}

/// Links between two languages of a graph, as `(position_x, position_y)`.
pub fn graph_pair_links(g: &AlignmentGraph, lang_x: &str, lang_y: &str) -> Option<LinkSet> {
    Some(g.pair_links(g.language_index(lang_x)?, g.language_index(lang_y)?))
}

/// Scores community-refined graph edges of one language pair. Only graphs
/// with gold and both languages are scored.
pub fn community_alignment_eval(
    graphs: &[AlignmentGraph],
    algorithm: CommunityAlgorithm,
    gamma: f64,
    seed: u64,
    lpc: &LpcConfig,
    gold: &GoldAlignment,
    lang_pair: (&str, &str),
) -> Result<EvalReport> {
    let predicted = graphs
        .par_iter()
        .enumerate()
        .filter(|(_, g)| gold.sentences.contains_key(g.sentence_id()))
        .filter_map(|(k, g)| {
            let p = detect(g, algorithm, gamma, seed.wrapping_add(k as u64), lpc);
            let refined = match refine_edges(g, &p) {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            graph_pair_links(&refined, lang_pair.0, lang_pair.1).map(|l| Ok((g.sentence_id().to_owned(), l)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    score(&predicted, gold)
}

/// Scores the unrefined graph edges of one language pair.
pub fn input_alignment_eval(graphs: &[AlignmentGraph], gold: &GoldAlignment, lang_pair: (&str, &str)) -> Result<EvalReport> {
    let predicted: BTreeMap<String, LinkSet> = graphs
        .iter()
        .filter(|g| gold.sentences.contains_key(g.sentence_id()))
        .filter_map(|g| graph_pair_links(g, lang_pair.0, lang_pair.1).map(|l| (g.sentence_id().to_owned(), l)))
        .collect();
    score(&predicted, gold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[(usize, usize)]) -> LinkSet {
        v.iter().copied().collect()
    }

    #[test]
    fn worked_example() {
        let gold = GoldAlignment {
            sentences: BTreeMap::from([("v1".to_owned(), GoldLinks::new(set(&[(0, 0), (1, 1)]), LinkSet::new()))]),
        };
        let pred = BTreeMap::from([("v1".to_owned(), set(&[(0, 0)]))]);
        let r = score(&pred, &gold).unwrap();
        assert_eq!((r.precision, r.recall), (1.0, 0.5));
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.aer - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_prediction_is_flagged() {
        let r = EvalReport::from_counts(Counts {
            predicted: 0,
            sure: 3,
            hit_sure: 0,
            hit_possible: 0,
        });
        assert!(r.empty_prediction);
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.f1, 0.0);
    }

    #[test]
    fn missing_gold_is_an_error() {
        let pred = BTreeMap::from([("v9".to_owned(), set(&[(0, 0)]))]);
        assert!(matches!(score(&pred, &GoldAlignment::default()), Err(Error::MissingGold(_))));
    }
}
