//! Per-sentence multiparallel alignment graphs.
//!
//! One vertex per token of every language in the sentence, one undirected edge
//! per bilingual alignment link. Node ids are assigned by language (in
//! lexicographic code order), then by position.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::{BilingualAlignmentSet, MultiParallelCorpus, Sentence};
use crate::{Error, LinkSet, Result};

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Topology {
    /// Builds a graph on `n` nodes. Duplicate edges are merged; self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            if u != v {
                set.insert((u.min(v), u.max(v)));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &set {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            adjacency,
            edge_count: set.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Single-source BFS distances; `None` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or_default();
            for &w in self.neighbors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

/// Connected components, each sorted, ordered by their smallest node.
pub fn connected_components(t: &Topology) -> Vec<Vec<usize>> {
    let n = t.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in t.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Interned (language, surface form) identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WordId(pub u32);

/// Deterministic word interner: ids follow the sorted (language, word) order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(String, String)>", into = "Vec<(String, String)>")]
pub struct Lexicon {
    entries: Vec<(String, String)>,
    index: HashMap<(String, String), WordId>,
}

impl From<Vec<(String, String)>> for Lexicon {
    fn from(mut entries: Vec<(String, String)>) -> Self {
        entries.sort();
        entries.dedup();
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), WordId(i as u32)))
            .collect();
        Self { entries, index }
    }
}

impl From<Lexicon> for Vec<(String, String)> {
    fn from(l: Lexicon) -> Self {
        l.entries
    }
}

impl Lexicon {
    pub fn from_corpus(corpus: &MultiParallelCorpus) -> Self {
        let entries: BTreeSet<(String, String)> = corpus
            .sentences()
            .values()
            .flat_map(|s| {
                s.iter()
                    .flat_map(|(lang, toks)| toks.iter().map(move |t| (lang.clone(), t.clone())))
            })
            .collect();
        Self::from(entries.into_iter().collect::<Vec<_>>())
    }

    pub fn get(&self, lang: &str, word: &str) -> Option<WordId> {
        self.index.get(&(lang.to_owned(), word.to_owned())).copied()
    }

    pub fn resolve(&self, id: WordId) -> (&str, &str) {
        let (l, w) = &self.entries[id.0 as usize];
        (l, w)
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One token occurrence of one language in one sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenNode {
    /// Index into [`AlignmentGraph::languages`].
    pub language: usize,
    pub position: usize,
    pub word_id: WordId,
}

/// Alignment graph of one multiparallel sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentGraph {
    sentence_id: String,
    languages: Vec<String>,
    offsets: Vec<usize>,
    nodes: Vec<TokenNode>,
    topology: Topology,
}

impl AsRef<Topology> for AlignmentGraph {
    fn as_ref(&self) -> &Topology {
        &self.topology
    }
}

impl AlignmentGraph {
    /// Assembles a graph from parts, checking the structural invariants.
    pub fn from_parts(
        sentence_id: impl Into<String>,
        languages: Vec<String>,
        lengths: &[usize],
        words: Vec<WordId>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let sentence_id = sentence_id.into();
        let bad = |message: String| Error::Graph {
            sentence: sentence_id.clone(),
            message,
        };
        if languages.len() != lengths.len() {
            return Err(bad("language and length lists differ".into()));
        }
        if languages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("languages must be strictly sorted".into()));
        }
        let mut offsets = Vec::with_capacity(languages.len() + 1);
        let mut nodes = Vec::new();
        offsets.push(0);
        for (lang, &len) in lengths.iter().enumerate() {
            for position in 0..len {
                nodes.push(TokenNode {
                    language: lang,
                    position,
                    word_id: WordId(0),
                });
            }
            offsets.push(nodes.len());
        }
        if words.len() != nodes.len() {
            return Err(bad(format!("{} words for {} nodes", words.len(), nodes.len())));
        }
        for (node, w) in nodes.iter_mut().zip(words) {
            node.word_id = w;
        }
        let n = nodes.len();
        let mut checked = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(bad(format!("edge ({u}, {v}) out of range")));
            }
            if nodes[u].language == nodes[v].language {
                return Err(bad(format!("edge ({u}, {v}) joins tokens of one language")));
            }
            checked.push((u, v));
        }
        Ok(Self {
            sentence_id,
            languages,
            offsets,
            nodes,
            topology: Topology::from_edges(n, checked),
        })
    }

    /// The same nodes with a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let lengths: Vec<usize> = (0..self.languages.len()).map(|l| self.len_of(l)).collect();
        Self::from_parts(
            self.sentence_id.clone(),
            self.languages.clone(),
            &lengths,
            self.nodes.iter().map(|n| n.word_id).collect(),
            edges,
        )
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn language_index(&self, code: &str) -> Option<usize> {
        self.languages.binary_search_by(|l| l.as_str().cmp(code)).ok()
    }

    pub fn language_code(&self, node: usize) -> &str {
        &self.languages[self.nodes[node].language]
    }

    pub fn nodes(&self) -> &[TokenNode] {
        &self.nodes
    }

    /// Node id range of one language.
    pub fn node_range(&self, lang: usize) -> Range<usize> {
        self.offsets[lang]..self.offsets[lang + 1]
    }

    pub fn len_of(&self, lang: usize) -> usize {
        self.offsets[lang + 1] - self.offsets[lang]
    }

    pub fn node_id(&self, lang: usize, position: usize) -> usize {
        debug_assert!(position < self.len_of(lang));
        self.offsets[lang] + position
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.topology.edge_count()
    }

    /// Edges between two languages as `(position in a, position in b)`.
    pub fn pair_links(&self, lang_a: usize, lang_b: usize) -> LinkSet {
        let range_a = self.node_range(lang_a);
        let range_b = self.node_range(lang_b);
        let mut out = LinkSet::new();
        for u in range_a.clone() {
            for &v in self.topology.neighbors(u) {
                if range_b.contains(&v) {
                    out.insert((u - range_a.start, v - range_b.start));
                }
            }
        }
        out
    }

    /// Text dump: `node_id<TAB>lang<TAB>pos<TAB>word` lines, then `edge<TAB>u<TAB>v`.
    pub fn dump(&self, lexicon: &Lexicon) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.sentence_id);
        for (id, node) in self.nodes.iter().enumerate() {
            let (_, word) = lexicon.resolve(node.word_id);
            let _ = writeln!(
                out,
                "{id}\t{}\t{}\t{word}",
                self.languages[node.language], node.position
            );
        }
        for (u, v) in self.topology.edges() {
            let _ = writeln!(out, "edge\t{u}\t{v}");
        }
        out
    }
}

/// Builds the graph of one sentence from every alignment set that has links for it.
pub fn build_graph(
    sentence_id: &str,
    sentence: &Sentence,
    alignments: &[BilingualAlignmentSet],
    lexicon: &Lexicon,
) -> Result<AlignmentGraph> {
    let languages: Vec<String> = sentence.keys().cloned().collect();
    let lengths: Vec<usize> = sentence.values().map(Vec::len).collect();
    let mut words = Vec::new();
    for (lang, tokens) in sentence {
        for t in tokens {
            words.push(lexicon.get(lang, t).ok_or_else(|| Error::Graph {
                sentence: sentence_id.to_owned(),
                message: format!("word `{t}` ({lang}) missing from the lexicon"),
            })?);
        }
    }
    let mut offsets = vec![0];
    for len in &lengths {
        offsets.push(offsets.last().unwrap() + len);
    }

    let mut edges = Vec::new();
    for set in alignments {
        let Some(links) = set.links.get(sentence_id) else {
            continue;
        };
        let (a, b) = (&set.lang_pair.0, &set.lang_pair.1);
        if a == b {
            return Err(Error::Graph {
                sentence: sentence_id.to_owned(),
                message: format!("alignment set pairs {a} with itself"),
            });
        }
        let find = |code: &str| {
            languages
                .binary_search_by(|l| l.as_str().cmp(code))
                .map_err(|_| Error::MissingLanguage {
                    sentence: sentence_id.to_owned(),
                    lang: code.to_owned(),
                })
        };
        if links.is_empty() {
            continue;
        }
        let (la, lb) = (find(a)?, find(b)?);
        for &(i, j) in links {
            if i >= lengths[la] || j >= lengths[lb] {
                return Err(Error::LinkOutOfBounds {
                    sentence: sentence_id.to_owned(),
                    lang_a: a.clone(),
                    lang_b: b.clone(),
                    link: (i, j),
                    len_a: lengths[la],
                    len_b: lengths[lb],
                });
            }
            edges.push((offsets[la] + i, offsets[lb] + j));
        }
    }
    AlignmentGraph::from_parts(sentence_id, languages, &lengths, words, edges)
}

/// Builds graphs for every sentence of the corpus, in sentence-id order.
pub fn build_graphs(
    corpus: &MultiParallelCorpus,
    alignments: &[BilingualAlignmentSet],
    lexicon: &Lexicon,
) -> Result<Vec<AlignmentGraph>> {
    let sentences: Vec<(&String, &Sentence)> = corpus.sentences().iter().collect();
    sentences
        .par_iter()
        .map(|(id, s)| build_graph(id, s, alignments, lexicon))
        .collect()
}
