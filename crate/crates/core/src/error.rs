use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error("sentence {sentence}: link {link:?} out of bounds for {lang_a}-{lang_b} (lengths {len_a}x{len_b})")]
    LinkOutOfBounds {
        sentence: String,
        lang_a: String,
        lang_b: String,
        link: (usize, usize),
        len_a: usize,
        len_b: usize,
    },

    #[error("sentence {sentence}: {message}")]
    Graph { sentence: String, message: String },

    #[error("modularity is undefined for a graph without edges")]
    EmptyGraph,

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("language `{lang}` missing from sentence {sentence}")]
    MissingLanguage { sentence: String, lang: String },

    #[error("checkpoint: bad magic bytes")]
    BadMagic,

    #[error("checkpoint: unsupported version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("checkpoint: truncated")]
    Truncated,

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("dimension mismatch for {name}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),

    #[error("gradient check failed for: {}", .0.join(", "))]
    GradientCheck(Vec<String>),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("no gold alignment for sentence {0}")]
    MissingGold(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
