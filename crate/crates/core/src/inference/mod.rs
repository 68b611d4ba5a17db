//! Score matrices from the trained model and link induction: row-softmax
//! thresholding in both directions followed by grow-diag-final-and.

mod gdfa;

pub use gdfa::{gdfa, gdfa_with_order, GrowOrder};

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::BilingualAlignmentSet;
use crate::gnn::{sigmoid, GnnModel, PairScorer};
use crate::graph::{AlignmentGraph, Lexicon};
use crate::{Error, LinkSet, Result};

/// Whether scores are decoder logits or sigmoid probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    #[default]
    Logit,
    Prob,
}

impl std::str::FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logit" | "logits" => Ok(Self::Logit),
            "prob" | "probs" => Ok(Self::Prob),
            other => Err(Error::Config(format!("unknown score mode `{other}`"))),
        }
    }
}

/// Symmetrized pair scores of one sentence pair, `m × l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    pub scores: Array2<f64>,
}

impl ScoreMatrix {
    pub fn rows(&self) -> usize {
        self.scores.nrows()
    }

    pub fn cols(&self) -> usize {
        self.scores.ncols()
    }

    pub fn transposed(&self) -> Self {
        Self {
            scores: self.scores.t().to_owned(),
        }
    }
}

/// `S_ij = ½(dec(x_i, y_j) + dec(y_j, x_i))` from precomputed hidden states.
pub fn score_matrix_from_hidden(
    model: &GnnModel,
    g: &AlignmentGraph,
    hidden: &Array2<f32>,
    lang_x: &str,
    lang_y: &str,
    mode: ScoreMode,
) -> Result<ScoreMatrix> {
    let missing = |lang: &str| Error::MissingLanguage {
        sentence: g.sentence_id().to_owned(),
        lang: lang.to_owned(),
    };
    let x = g.language_index(lang_x).ok_or_else(|| missing(lang_x))?;
    let y = g.language_index(lang_y).ok_or_else(|| missing(lang_y))?;
    let scorer = PairScorer::new(&model.params, hidden.view());
    let value = |i: usize, j: usize| {
        let z = scorer.logit(i, j) as f64;
        match mode {
            ScoreMode::Logit => z,
            ScoreMode::Prob => sigmoid(z),
        }
    };
    let (m, l) = (g.len_of(x), g.len_of(y));
    let scores = Array2::from_shape_fn((m, l), |(i, j)| {
        let (u, v) = (g.node_id(x, i), g.node_id(y, j));
        0.5 * (value(u, v) + value(v, u))
    });
    Ok(ScoreMatrix { scores })
}

pub fn score_matrix(
    model: &GnnModel,
    g: &AlignmentGraph,
    lexicon: &Lexicon,
    lang_x: &str,
    lang_y: &str,
    mode: ScoreMode,
) -> Result<ScoreMatrix> {
    let hidden = model.encode(g, lexicon)?;
    score_matrix_from_hidden(model, g, &hidden, lang_x, lang_y, mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Rows are source tokens.
    Forward,
    /// Rows are target tokens.
    Backward,
}

/// Row softmax, cells reaching `α / row_width` survive, and each surviving row
/// links its highest-scoring survivor. Links are returned as `(i, j)` of the
/// original matrix in both directions.
pub fn threshold_directional(s: &ScoreMatrix, alpha: f64, direction: Direction) -> LinkSet {
    let view = match direction {
        Direction::Forward => s.scores.view(),
        Direction::Backward => s.scores.t(),
    };
    let mut out = LinkSet::new();
    let width = view.ncols();
    if width == 0 {
        return out;
    }
    let threshold = alpha / width as f64;
    for (r, row) in view.rows().into_iter().enumerate() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ex: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
        let sum: f64 = ex.iter().sum();
        let best = (0..width)
            .filter(|&c| ex[c] / sum >= threshold)
            .max_by(|&a, &b| row[a].total_cmp(&row[b]).then(b.cmp(&a)));
        if let Some(c) = best {
            out.insert(match direction {
                Direction::Forward => (r, c),
                Direction::Backward => (c, r),
            });
        }
    }
    out
}

/// Forward and backward candidate sets of a score matrix.
pub fn directional_links(s: &ScoreMatrix, alpha: f64) -> (LinkSet, LinkSet) {
    (
        threshold_directional(s, alpha, Direction::Forward),
        threshold_directional(s, alpha, Direction::Backward),
    )
}

/// GDFA over the thresholded candidates of `s`.
pub fn tgdfa(s: &ScoreMatrix, alpha: f64) -> LinkSet {
    let (f, b) = directional_links(s, alpha);
    gdfa(&f, &b, s.rows(), s.cols())
}

/// As [`tgdfa`] with `orig` joining the union only.
pub fn tgdfa_plus_orig(s: &ScoreMatrix, alpha: f64, orig: &LinkSet) -> LinkSet {
    let (f, b) = directional_links(s, alpha);
    gdfa::gdfa_extra(&f, &b, orig, s.rows(), s.cols(), GrowOrder::Sorted)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlignMethod {
    #[default]
    #[serde(rename = "tgdfa")]
    Tgdfa,
    #[serde(rename = "tgdfa+orig")]
    TgdfaOrig,
}

impl std::str::FromStr for AlignMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgdfa" => Ok(Self::Tgdfa),
            "tgdfa+orig" => Ok(Self::TgdfaOrig),
            other => Err(Error::Config(format!("unknown alignment method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignOptions {
    pub alpha: f64,
    pub method: AlignMethod,
    pub mode: ScoreMode,
}

impl Default for AlignOptions {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            method: AlignMethod::Tgdfa,
            mode: ScoreMode::Logit,
        }
    }
}

/// Aligns every requested language pair of every graph. Graphs lacking one
/// of the languages get no entry for that pair. With `tgdfa+orig`, `orig`
/// must hold a set for each pair, in either orientation.
pub fn align_graphs(
    model: &GnnModel,
    graphs: &[AlignmentGraph],
    lexicon: &Lexicon,
    pairs: &[(String, String)],
    opts: &AlignOptions,
    orig: &[BilingualAlignmentSet],
) -> Result<Vec<BilingualAlignmentSet>> {
    let orig_sets: Vec<Option<BilingualAlignmentSet>> = pairs
        .iter()
        .map(|(x, y)| {
            orig.iter().find_map(|s| {
                if (&s.lang_pair.0, &s.lang_pair.1) == (x, y) {
                    Some(s.clone())
                } else if (&s.lang_pair.1, &s.lang_pair.0) == (x, y) {
                    Some(s.transposed())
                } else {
                    None
                }
            })
        })
        .collect();
    if opts.method == AlignMethod::TgdfaOrig {
        if let Some(k) = orig_sets.iter().position(Option::is_none) {
            return Err(Error::Config(format!(
                "tgdfa+orig needs original alignments for {}-{}",
                pairs[k].0, pairs[k].1
            )));
        }
    }
    let empty = LinkSet::new();
    let per_graph: Vec<Vec<Option<LinkSet>>> = graphs
        .par_iter()
        .map(|g| {
            let hidden = model.encode(g, lexicon)?;
            pairs
                .iter()
                .zip(&orig_sets)
                .map(|((x, y), o)| {
                    if g.language_index(x).is_none() || g.language_index(y).is_none() {
                        return Ok(None);
                    }
                    let s = score_matrix_from_hidden(model, g, &hidden, x, y, opts.mode)?;
                    Ok(Some(match opts.method {
                        AlignMethod::Tgdfa => tgdfa(&s, opts.alpha),
                        AlignMethod::TgdfaOrig => {
                            let o = o.as_ref().and_then(|o| o.links.get(g.sentence_id())).unwrap_or(&empty);
                            tgdfa_plus_orig(&s, opts.alpha, o)
                        }
                    }))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, (x, y))| {
            let links: BTreeMap<String, LinkSet> = graphs
                .iter()
                .zip(&per_graph)
                .filter_map(|(g, r)| r[k].clone().map(|l| (g.sentence_id().to_owned(), l)))
                .collect();
            BilingualAlignmentSet {
                lang_pair: (x.clone(), y.clone()),
                links,
            }
        })
        .collect())
}
