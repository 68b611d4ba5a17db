//! POS annotation projection through word alignments.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus_io::TaggedToken;
use crate::LinkSet;

/// Tag of target tokens without any vote.
pub const NO_TAG: &str = "X";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
    /// Per target token, `(source language, tag)` of every vote.
    pub votes: Vec<Vec<(String, String)>>,
}

impl ProjectedSentence {
    pub fn x_fraction(&self) -> f64 {
        if self.tags.is_empty() {
            return 0.0;
        }
        self.tags.iter().filter(|t| *t == NO_TAG).count() as f64 / self.tags.len() as f64
    }
}

/// One projection source: its language, tagged sentence and links given as
/// `(target index, source index)`.
#[derive(Clone, Copy, Debug)]
pub struct Source<'a> {
    pub language: &'a str,
    pub tokens: &'a [TaggedToken],
    pub links: &'a LinkSet,
}

/// Majority vote over the tags of all aligned source tokens, one vote per
/// aligned token. Sources are given in priority order; among tied tags the
/// one whose first vote comes earliest in that order wins.
pub fn project(target: &[String], sources: &[Source<'_>]) -> ProjectedSentence {
    let mut votes: Vec<Vec<(String, String)>> = vec![Vec::new(); target.len()];
    for src in sources {
        for &(t, s) in src.links {
            if let (Some(slot), Some(tok)) = (votes.get_mut(t), src.tokens.get(s)) {
                slot.push((src.language.to_owned(), tok.tag.clone()));
            }
        }
    }
    let tags = votes
        .iter()
        .map(|v| {
            let mut count: HashMap<&str, (usize, usize)> = HashMap::new();
            for (rank, (_, tag)) in v.iter().enumerate() {
                count.entry(tag).or_insert((0, rank)).0 += 1;
            }
            count
                .into_iter()
                .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
                .map_or(NO_TAG.to_owned(), |(tag, _)| tag.to_owned())
        })
        .collect();
    ProjectedSentence {
        tokens: target.to_vec(),
        tags,
        votes,
    }
}

/// Projection from a single source.
pub fn direct_transfer(target: &[String], source: Source<'_>) -> ProjectedSentence {
    project(target, &[source])
}

/// Keeps sentences whose share of `X` tags is at most `threshold`.
pub fn filter_x(sentences: Vec<ProjectedSentence>, threshold: f64) -> Vec<ProjectedSentence> {
    sentences.into_iter().filter(|s| s.x_fraction() <= threshold).collect()
}

/// `token<TAB>tag` lines with a blank line after each sentence.
pub fn write_conll(sentences: &[ProjectedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for (tok, tag) in s.tokens.iter().zip(&s.tags) {
            let _ = writeln!(out, "{tok}\t{tag}");
        }
        out.push('\n');
    }
    out
}
