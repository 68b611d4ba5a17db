use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, split_id};
use crate::{Error, Link, LinkSet, Result};

/// Alignments of one ordered language pair, keyed by sentence id.
///
/// Bounds are not checked here; graph construction validates every link
/// against the sentence lengths.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilingualAlignmentSet {
    pub lang_pair: (String, String),
    pub links: BTreeMap<String, LinkSet>,
}

impl BilingualAlignmentSet {
    pub fn new(lang_a: impl Into<String>, lang_b: impl Into<String>) -> Self {
        Self {
            lang_pair: (lang_a.into(), lang_b.into()),
            links: BTreeMap::new(),
        }
    }

    /// The same alignments with the language roles swapped.
    pub fn transposed(&self) -> Self {
        Self {
            lang_pair: (self.lang_pair.1.clone(), self.lang_pair.0.clone()),
            links: self
                .links
                .iter()
                .map(|(id, l)| (id.clone(), l.iter().map(|&(i, j)| (j, i)).collect()))
                .collect(),
        }
    }
}

/// Gold links of one sentence. `possible` always contains `sure`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLinks {
    pub sure: LinkSet,
    pub possible: LinkSet,
}

impl GoldLinks {
    pub fn new(sure: LinkSet, possible: LinkSet) -> Self {
        let mut possible = possible;
        possible.extend(sure.iter().copied());
        Self { sure, possible }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAlignment {
    pub sentences: BTreeMap<String, GoldLinks>,
}

fn parse_index(s: &str, one_based: bool) -> Option<usize> {
    let v: usize = s.parse().ok()?;
    if one_based {
        v.checked_sub(1)
    } else {
        Some(v)
    }
}

fn parse_item(item: &str, sep: char, one_based: bool) -> Option<Link> {
    let (a, b) = item.split_once(sep)?;
    Some((parse_index(a, one_based)?, parse_index(b, one_based)?))
}

/// Parses `sentence_id<TAB>i-j i-j ...` lines.
pub fn parse_pharaoh(
    text: &str,
    lang_pair: (&str, &str),
    one_based: bool,
    path: &Path,
) -> Result<BilingualAlignmentSet> {
    let mut set = BilingualAlignmentSet::new(lang_pair.0, lang_pair.1);
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = split_id(line);
        let mut links = LinkSet::new();
        for item in rest.split_whitespace() {
            let link = parse_item(item, '-', one_based)
                .ok_or_else(|| Error::parse(path, n + 1, format!("bad alignment item `{item}`")))?;
            links.insert(link);
        }
        if set.links.insert(id.to_owned(), links).is_some() {
            return Err(Error::parse(path, n + 1, format!("duplicate sentence id {id}")));
        }
    }
    Ok(set)
}

/// Language pair from a file name such as `eng-fra.align`.
pub fn pair_from_path(path: &Path) -> Result<(String, String)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::parse(path, 0, "cannot read file name"))?;
    match stem.split_once('-') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains('-') => {
            Ok((a.to_owned(), b.to_owned()))
        }
        _ => Err(Error::parse(path, 0, "expected a `<langA>-<langB>` file name")),
    }
}

pub fn load_pharaoh(
    path: &Path,
    lang_pair: (&str, &str),
    one_based: bool,
) -> Result<BilingualAlignmentSet> {
    parse_pharaoh(&read_text(path)?, lang_pair, one_based, path)
}

fn format_links(out: &mut String, links: &LinkSet, sep: char) {
    for (k, (i, j)) in links.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{i}{sep}{j}");
    }
}

/// Writes one line per sentence, links in ascending order.
pub fn write_pharaoh(set: &BilingualAlignmentSet) -> String {
    let mut out = String::new();
    for (id, links) in &set.links {
        out.push_str(id);
        out.push('\t');
        format_links(&mut out, links, '-');
        out.push('\n');
    }
    out
}

/// Parses gold lines where `i-j` is a sure link and `i?j` a possible one.
pub fn parse_gold(text: &str, path: &Path) -> Result<GoldAlignment> {
    let mut gold = GoldAlignment::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = split_id(line);
        let mut sure = LinkSet::new();
        let mut possible = LinkSet::new();
        for item in rest.split_whitespace() {
            if let Some(link) = parse_item(item, '-', false) {
                sure.insert(link);
            } else if let Some(link) = parse_item(item, '?', false) {
                possible.insert(link);
            } else {
                return Err(Error::parse(path, n + 1, format!("bad gold item `{item}`")));
            }
        }
        if gold
            .sentences
            .insert(id.to_owned(), GoldLinks::new(sure, possible))
            .is_some()
        {
            return Err(Error::parse(path, n + 1, format!("duplicate sentence id {id}")));
        }
    }
    Ok(gold)
}

pub fn load_gold(path: &Path) -> Result<GoldAlignment> {
    parse_gold(&read_text(path)?, path)
}

pub fn write_gold(gold: &GoldAlignment) -> String {
    let mut out = String::new();
    for (id, g) in &gold.sentences {
        out.push_str(id);
        out.push('\t');
        format_links(&mut out, &g.sure, '-');
        let possible_only: LinkSet = g.possible.difference(&g.sure).copied().collect();
        if !g.sure.is_empty() && !possible_only.is_empty() {
            out.push(' ');
        }
        format_links(&mut out, &possible_only, '?');
        out.push('\n');
    }
    out
}
