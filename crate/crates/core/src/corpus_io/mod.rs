//! Text and binary formats: corpora, Pharaoh alignments, gold alignments,
//! POS-tagged corpora and model checkpoints.
//!
//! All indices are 0-based in memory. Pharaoh input written with 1-based
//! indices can be read with `one_based = true`.

mod checkpoint;
mod corpus;
mod pharaoh;
mod pos;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use corpus::{load_corpus, parse_corpus_file, CorpusLoadReport, MultiParallelCorpus, Sentence};
pub use pharaoh::{
    load_gold, load_pharaoh, parse_gold, parse_pharaoh, pair_from_path, write_gold, write_pharaoh,
    BilingualAlignmentSet, GoldAlignment, GoldLinks,
};
pub use pos::{load_pos, parse_pos, write_pos, PosTaggedCorpus, TaggedToken, UPOS_TAGS};

use std::path::Path;

use crate::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Language code of a file such as `eng.txt` or `eng.pos`.
pub fn language_from_path(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .ok_or_else(|| Error::parse(path, 0, "cannot derive a language code from the file name"))
}

/// Splits `sentence_id<TAB>rest`. A line holding only an id yields an empty rest.
pub(crate) fn split_id(line: &str) -> (&str, &str) {
    match line.split_once('\t') {
        Some((id, rest)) => (id.trim(), rest),
        None => (line.trim(), ""),
    }
}
