use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{language_from_path, read_text, split_id};
use crate::{Error, Result};

/// Tokens of one multiparallel sentence, keyed by language code.
pub type Sentence = BTreeMap<String, Vec<String>>;

/// Sentence-aligned text in several languages sharing sentence ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiParallelCorpus {
    languages: Vec<String>,
    sentences: BTreeMap<String, Sentence>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusLoadReport {
    /// Sentence ids found in fewer than two files.
    pub dropped: usize,
}

impl MultiParallelCorpus {
    /// Builds a corpus from per-language sentences, keeping ids with at least
    /// two languages. Returns the number of dropped ids.
    pub fn from_languages(
        per_language: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    ) -> Result<(Self, CorpusLoadReport)> {
        let mut sentences: BTreeMap<String, Sentence> = BTreeMap::new();
        for (lang, lines) in per_language.iter() {
            for (id, tokens) in lines {
                if tokens.is_empty() {
                    return Err(Error::Corpus(format!("sentence {id} in {lang} has no tokens")));
                }
                sentences
                    .entry(id.clone())
                    .or_default()
                    .insert(lang.clone(), tokens.clone());
            }
        }
        let before = sentences.len();
        sentences.retain(|_, s| s.len() >= 2);
        let dropped = before - sentences.len();
        let languages: BTreeSet<String> = sentences
            .values()
            .flat_map(|s| s.keys().cloned())
            .collect();
        Ok((
            Self {
                languages: languages.into_iter().collect(),
                sentences,
            },
            CorpusLoadReport { dropped },
        ))
    }

    /// Language codes in lexicographic order.
    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn sentences(&self) -> &BTreeMap<String, Sentence> {
        &self.sentences
    }

    pub fn sentence(&self, id: &str) -> Option<&Sentence> {
        self.sentences.get(id)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Restricts the corpus to the given sentence ids.
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Self {
        let sentences: BTreeMap<String, Sentence> = ids
            .into_iter()
            .filter_map(|id| self.sentences.get(id).map(|s| (id.to_owned(), s.clone())))
            .collect();
        let languages: BTreeSet<String> = sentences
            .values()
            .flat_map(|s| s.keys().cloned())
            .collect();
        Self {
            languages: languages.into_iter().collect(),
            sentences,
        }
    }

    /// Token sequences of one language, keyed by sentence id.
    pub fn language_lines(&self, lang: &str) -> BTreeMap<&str, &[String]> {
        self.sentences
            .iter()
            .filter_map(|(id, s)| s.get(lang).map(|t| (id.as_str(), t.as_slice())))
            .collect()
    }
}

/// Parses one `<lang>.txt` file of `sentence_id<TAB>tok tok ...` lines.
pub fn parse_corpus_file(text: &str, path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        if !line.contains('\t') {
            return Err(Error::parse(path, line_no, "expected `sentence_id<TAB>tokens`"));
        }
        let (id, rest) = split_id(line);
        if id.is_empty() {
            return Err(Error::parse(path, line_no, "empty sentence id"));
        }
        let tokens: Vec<String> = rest.split_whitespace().map(str::to_owned).collect();
        if tokens.is_empty() {
            return Err(Error::parse(path, line_no, format!("sentence {id} has no tokens")));
        }
        if out.insert(id.to_owned(), tokens).is_some() {
            return Err(Error::parse(path, line_no, format!("duplicate sentence id {id}")));
        }
    }
    Ok(out)
}

/// Loads one file per language; the language code is the file stem.
pub fn load_corpus<P: AsRef<Path>>(paths: &[P]) -> Result<(MultiParallelCorpus, CorpusLoadReport)> {
    let mut per_language = BTreeMap::new();
    for path in paths {
        let path = path.as_ref();
        let lang = language_from_path(path)?;
        let lines = parse_corpus_file(&read_text(path)?, path)?;
        if per_language.insert(lang.clone(), lines).is_some() {
            return Err(Error::Corpus(format!("language {lang} given twice")));
        }
    }
    MultiParallelCorpus::from_languages(per_language)
}
