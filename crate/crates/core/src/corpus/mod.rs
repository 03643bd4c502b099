//! Corpus ingestion: manifest loading, tokenization and book-disjoint splits.

mod manifest;
mod split;
pub mod tokenize;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, write_manifest};
pub use split::{make_splits, Split, SplitAssignment};
pub use tokenize::{tokenize, TokenizedText};

/// Dense author index, assigned in manifest order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorId(pub u32);

impl AuthorId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub id: AuthorId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BookRole {
    Known,
    OodValidation,
    OodTest,
}

impl BookRole {
    pub fn is_ood(self) -> bool {
        !matches!(self, BookRole::Known)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BookRole::Known => "known",
            BookRole::OodValidation => "ood_validation",
            BookRole::OodTest => "ood_test",
        }
    }
}

impl std::str::FromStr for BookRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" => Ok(BookRole::Known),
            "ood_validation" => Ok(BookRole::OodValidation),
            "ood_test" => Ok(BookRole::OodTest),
            other => Err(Error::Parse {
                what: "book role",
                message: format!("unknown role {other:?}"),
            }),
        }
    }
}

/// One manifest row. `id` is the row index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookRef {
    pub id: usize,
    pub author: AuthorId,
    pub title: String,
    pub path: PathBuf,
    pub role: BookRole,
}

/// The books of a manifest together with the author table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub authors: Vec<Author>,
    pub books: Vec<BookRef>,
}

impl Corpus {
    pub fn author(&self, id: AuthorId) -> &Author {
        &self.authors[id.index()]
    }

    /// Authors that own at least one known book, in id order.
    pub fn known_authors(&self) -> Vec<Author> {
        self.authors
            .iter()
            .filter(|a| {
                self.books
                    .iter()
                    .any(|b| b.author == a.id && b.role == BookRole::Known)
            })
            .cloned()
            .collect()
    }

    /// Reads and tokenizes every book; books are processed in parallel.
    pub fn tokenize_all(&self) -> Result<Vec<TokenizedBook>> {
        self.books
            .par_iter()
            .map(TokenizedBook::load)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedBook {
    pub book: BookRef,
    pub text: TokenizedText,
}

impl TokenizedBook {
    pub fn load(book: &BookRef) -> Result<Self> {
        let raw = read_text(&book.path)?;
        Ok(TokenizedBook {
            book: book.clone(),
            text: tokenize(&raw),
        })
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.text.sentences
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
