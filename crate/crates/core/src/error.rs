use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("duplicate book ({author}, {title}) in manifest")]
    DuplicateBook { author: String, title: String },

    #[error("author {author} is listed both as known and as out-of-distribution")]
    MixedAuthorRole { author: String },

    #[error("known author {author} has {books} book(s); at least 3 are required")]
    TooFewBooks { author: String, books: usize },

    #[error("only {available} admissible distinct tokens for a vocabulary of size {requested}")]
    VocabularyTooSmall { requested: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("training data has a single class")]
    SingleClass,

    #[error("non-finite feature value at row {row}")]
    NonFinite { row: usize },

    #[error("one-vs-all needs at least 2 known authors, got {0}")]
    TooFewAuthors(usize),

    #[error("author {0} has no training documents")]
    NoTrainingDocuments(String),

    #[error("document has no tokens")]
    EmptyDocument,

    #[error("unsupported {what} version {found}")]
    Version { what: &'static str, found: u32 },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable short identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Manifest { .. } => "manifest",
            Error::EmptyCorpus => "empty_corpus",
            Error::DuplicateBook { .. } => "duplicate_book",
            Error::MixedAuthorRole { .. } => "mixed_author_role",
            Error::TooFewBooks { .. } => "too_few_books",
            Error::VocabularyTooSmall { .. } => "vocabulary_too_small",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingleClass => "single_class",
            Error::NonFinite { .. } => "non_finite",
            Error::TooFewAuthors(_) => "too_few_authors",
            Error::NoTrainingDocuments(_) => "no_training_documents",
            Error::EmptyDocument => "empty_document",
            Error::Version { .. } => "version",
            Error::Parse { .. } => "parse",
            Error::Json(_) => "json",
            Error::Toml(_) => "toml",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
