use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use super::config::{CorpusSource, ExperimentConfig};
use super::synthetic::make_synthetic_corpus;
use crate::corpus::{load_manifest, make_splits, Author, BookRole, Corpus, Split, SplitAssignment, TokenizedBook};
use crate::error::{Error, Result};
use crate::features::{chunk_book, vectorize, ChunkSize};
use crate::openset::{Document, Label};
use crate::vocab::{build_vocabulary_from_texts, NameFilterPolicy, Vocabulary};

/// A tokenized corpus with its book-disjoint split.
#[derive(Clone, Debug)]
pub struct PreparedCorpus {
    pub corpus: Corpus,
    pub books: Vec<TokenizedBook>,
    pub splits: SplitAssignment,
    split_of: HashMap<usize, Split>,
}

impl PreparedCorpus {
    /// Tokenizes every book and splits them. Splits are weighted by
    /// sentence count so one assignment serves every document length.
    pub fn prepare(corpus: Corpus, seed: u64) -> Result<Self> {
        let mut books = corpus.tokenize_all()?;
        books.retain(|b| {
            if b.text.sentence_count() == 0 {
                log::warn!("dropping {:?}: no sentences", b.book.title);
            }
            b.text.sentence_count() > 0
        });
        let refs: Vec<_> = books.iter().map(|b| b.book.clone()).collect();
        let weights: Vec<usize> = books.iter().map(|b| b.text.sentence_count()).collect();
        let splits = make_splits(&refs, &weights, seed)?;
        let split_of = Split::ALL
            .into_iter()
            .flat_map(|s| splits.get(s).iter().map(move |b| (b.id, s)))
            .collect();
        Ok(PreparedCorpus {
            corpus,
            books,
            splits,
            split_of,
        })
    }

    /// Loads (or generates, for synthetic sources) the corpus named in
    /// `cfg`. Synthetic corpora are written under `work_dir/corpus`.
    pub fn from_config(cfg: &ExperimentConfig, work_dir: &Path) -> Result<Self> {
        let manifest = match &cfg.corpus {
            CorpusSource::Manifest(path) => path.clone(),
            CorpusSource::Synthetic(spec) => make_synthetic_corpus(spec, &work_dir.join("corpus"))?,
        };
        Self::prepare(load_manifest(&manifest)?, cfg.seed)
    }

    pub fn known_authors(&self) -> Vec<Author> {
        self.corpus.known_authors()
    }

    pub fn split_of(&self, book_id: usize) -> Option<Split> {
        self.split_of.get(&book_id).copied()
    }

    pub fn books_in(&self, split: Split) -> impl Iterator<Item = &TokenizedBook> {
        self.books.iter().filter(move |b| self.split_of(b.book.id) == Some(split))
    }

    /// Vocabulary ranked over the known books of the training split.
    pub fn vocabulary(&self, k: usize, policy: &NameFilterPolicy) -> Result<Vocabulary> {
        let train = self
            .books_in(Split::Train)
            .filter(|b| b.book.role == BookRole::Known)
            .map(|b| &b.text);
        build_vocabulary_from_texts(train, k, policy)
    }

    /// Raw-count documents of one split. Out-of-distribution books are
    /// labelled UNKNOWN and only included when `include_ood` is set.
    pub fn documents(&self, split: Split, size: ChunkSize, vocab: &Vocabulary, include_ood: bool) -> Vec<Document> {
        let books: Vec<&TokenizedBook> = self
            .books_in(split)
            .filter(|b| include_ood || !b.book.role.is_ood())
            .collect();
        books
            .par_iter()
            .flat_map_iter(|b| {
                let chunks = chunk_book(b, size);
                if chunks.is_empty() {
                    log::warn!("{:?} is shorter than one {size}-sentence chunk; dropped", b.book.title);
                }
                let label = if b.book.role.is_ood() {
                    Label::Unknown
                } else {
                    Label::Author(b.book.author)
                };
                chunks.into_iter().map(move |c| Document {
                    book_id: b.book.id,
                    chunk_index: c.index,
                    label,
                    counts: vectorize(&c, vocab),
                })
            })
            .collect()
    }

    /// Document counts per split at `size`, known and OOD.
    pub fn document_counts(&self, size: ChunkSize) -> HashMap<Split, (usize, usize)> {
        let mut out: HashMap<Split, (usize, usize)> = HashMap::new();
        for b in &self.books {
            if let Some(s) = self.split_of(b.book.id) {
                let n = crate::features::chunk_count(b.text.sentence_count(), size);
                let e = out.entry(s).or_default();
                if b.book.role.is_ood() {
                    e.1 += n;
                } else {
                    e.0 += n;
                }
            }
        }
        out
    }
}

pub(crate) fn largest(sizes: &[usize]) -> Result<usize> {
    sizes
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidArgument("no vocabulary sizes configured".into()))
}
