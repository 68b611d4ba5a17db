use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{language_from_path, read_text, split_id};
use crate::{Error, Result};

/// Universal POS inventory. `X` doubles as the "no projection" tag.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: String,
    pub tag: String,
}

/// Tagged sentences keyed by (sentence id, language).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PosTaggedCorpus {
    pub sentences: BTreeMap<(String, String), Vec<TaggedToken>>,
}

impl PosTaggedCorpus {
    pub fn get(&self, sentence_id: &str, lang: &str) -> Option<&[TaggedToken]> {
        self.sentences
            .get(&(sentence_id.to_owned(), lang.to_owned()))
            .map(Vec::as_slice)
    }

    pub fn merge(&mut self, other: PosTaggedCorpus) {
        self.sentences.extend(other.sentences);
    }
}

/// Parses `sentence_id<TAB>tok/TAG tok/TAG ...` lines of one language.
/// The tag is split off at the last `/`, so tokens may contain slashes.
pub fn parse_pos(text: &str, lang: &str, path: &Path) -> Result<PosTaggedCorpus> {
    let mut out = PosTaggedCorpus::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (id, rest) = split_id(line);
        let mut tokens = Vec::new();
        for item in rest.split_whitespace() {
            let (token, tag) = item
                .rsplit_once('/')
                .filter(|(t, _)| !t.is_empty())
                .ok_or_else(|| Error::parse(path, n + 1, format!("expected `token/TAG`, got `{item}`")))?;
            if !UPOS_TAGS.contains(&tag) {
                return Err(Error::parse(path, n + 1, format!("unknown UPOS tag `{tag}`")));
            }
            tokens.push(TaggedToken {
                token: token.to_owned(),
                tag: tag.to_owned(),
            });
        }
        if tokens.is_empty() {
            return Err(Error::parse(path, n + 1, format!("sentence {id} has no tokens")));
        }
        if out
            .sentences
            .insert((id.to_owned(), lang.to_owned()), tokens)
            .is_some()
        {
            return Err(Error::parse(path, n + 1, format!("duplicate sentence id {id}")));
        }
    }
    Ok(out)
}

/// Loads `<lang>.pos`.
pub fn load_pos(path: &Path) -> Result<PosTaggedCorpus> {
    let lang = language_from_path(path)?;
    parse_pos(&read_text(path)?, &lang, path)
}

/// Writes the sentences of one language in the `.pos` format.
pub fn write_pos(corpus: &PosTaggedCorpus, lang: &str) -> String {
    let mut out = String::new();
    for ((id, l), tokens) in &corpus.sentences {
        if l != lang {
            continue;
        }
        out.push_str(id);
        out.push('\t');
        for (k, t) in tokens.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}/{}", t.token, t.tag);
        }
        out.push('\n');
    }
    out
}
