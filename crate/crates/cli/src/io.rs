//! File discovery and loading shared by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mpwa_core::corpus_io::{load_corpus, load_pharaoh, pair_from_path, BilingualAlignmentSet};
use mpwa_core::{AlignmentGraph, Lexicon, MultiParallelCorpus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Files with extension `ext` in `dir`, sorted. A path naming a file is
/// returned as is.
pub fn files_with_extension(path: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading directory {}", path.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .{ext} files in {}", path.display());
    }
    Ok(files)
}

/// Expands each path into its `.ext` files.
pub fn expand(paths: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(files_with_extension(p, ext)?);
    }
    Ok(out)
}

pub fn read_corpus(paths: &[PathBuf]) -> Result<MultiParallelCorpus> {
    let files = expand(paths, "txt")?;
    let (corpus, report) = load_corpus(&files)?;
    if report.dropped > 0 {
        eprintln!("corpus: dropped {} sentence ids present in fewer than two files", report.dropped);
    }
    Ok(corpus)
}

pub fn read_alignments(paths: &[PathBuf], one_based: bool) -> Result<Vec<BilingualAlignmentSet>> {
    expand(paths, "align")?
        .iter()
        .map(|p| {
            let (a, b) = pair_from_path(p)?;
            Ok(load_pharaoh(p, (&a, &b), one_based)?)
        })
        .collect()
}

pub fn read_ids(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_owned).collect())
}

/// Parses `a-b` into a language pair.
pub fn parse_pair(s: &str) -> Result<(String, String)> {
    match s.split_once('-') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() && a != b => Ok((a.to_owned(), b.to_owned())),
        _ => bail!("expected a language pair such as `eng-fra`, got `{s}`"),
    }
}

/// Hash of the contents of `paths` in the given order.
pub fn hash_files(paths: &[PathBuf]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
        h.update(p.file_name().map(|n| n.as_encoded_bytes()).unwrap_or_default());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex(&h.finalize()))
}

pub fn hash_str(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Sentence graphs with the lexicon their word ids refer to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphBundle {
    pub lexicon: Lexicon,
    pub graphs: Vec<AlignmentGraph>,
}

impl GraphBundle {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("decoding graphs from {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, serde_json::to_vec(self)?)
    }

    /// Graphs whose ids are in `ids`, in graph order.
    pub fn select(&self, ids: &[String]) -> Vec<AlignmentGraph> {
        let wanted: std::collections::BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        self.graphs.iter().filter(|g| wanted.contains(g.sentence_id())).cloned().collect()
    }
}
