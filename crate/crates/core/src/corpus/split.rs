use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AuthorId, BookRef, BookRole};
use crate::error::{Error, Result};

/// Target document shares of train, validation and test.
pub const SPLIT_RATIOS: [f64; 3] = [0.64, 0.16, 0.20];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

/// Book-disjoint train/validation/test assignment. Each list is ordered by
/// book id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub train: Vec<BookRef>,
    pub validation: Vec<BookRef>,
    pub test: Vec<BookRef>,
}

impl SplitAssignment {
    pub fn get(&self, split: Split) -> &[BookRef] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }

    pub fn split_of(&self, book_id: usize) -> Option<Split> {
        Split::ALL
            .into_iter()
            .find(|&s| self.get(s).iter().any(|b| b.id == book_id))
    }

    fn push(&mut self, split: Split, book: BookRef) {
        match split {
            Split::Train => self.train.push(book),
            Split::Validation => self.validation.push(book),
            Split::Test => self.test.push(book),
        }
    }
}

/// Assigns whole books to splits so that each known author's document
/// counts land as close to 64/16/20 as book granularity allows.
///
/// `doc_counts[i]` is the number of documents book `i` yields. Books are
/// visited largest first (ties in seeded random order) and each goes to the
/// split furthest below its target, except that a split still empty when
/// only as many books remain as there are empty splits is served first.
/// Out-of-distribution books go to the split their role names.
pub fn make_splits(books: &[BookRef], doc_counts: &[usize], seed: u64) -> Result<SplitAssignment> {
    if books.len() != doc_counts.len() {
        return Err(Error::InvalidArgument(format!(
            "{} books but {} document counts",
            books.len(),
            doc_counts.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_author: BTreeMap<AuthorId, Vec<usize>> = BTreeMap::new();
    let mut out = SplitAssignment::default();

    for (i, book) in books.iter().enumerate() {
        match book.role {
            BookRole::Known => by_author.entry(book.author).or_default().push(i),
            BookRole::OodValidation => out.push(Split::Validation, book.clone()),
            BookRole::OodTest => out.push(Split::Test, book.clone()),
        }
    }

    for (author, mut indices) in by_author {
        if indices.len() < 3 {
            return Err(Error::TooFewBooks {
                author: author.to_string(),
                books: indices.len(),
            });
        }
        indices.shuffle(&mut rng);
        indices.sort_by(|&a, &b| doc_counts[b].cmp(&doc_counts[a]));

        let total: usize = indices.iter().map(|&i| doc_counts[i]).sum();
        let targets = SPLIT_RATIOS.map(|r| r * total as f64);
        let mut filled = [0usize; 3];
        let mut books_in = [0usize; 3];

        for (pos, &i) in indices.iter().enumerate() {
            let remaining = indices.len() - pos;
            let empty = books_in.iter().filter(|&&n| n == 0).count();
            let deficit = |s: usize| targets[s] - filled[s] as f64;
            let choice = (0..3)
                .filter(|&s| remaining > empty || books_in[s] == 0)
                .max_by(|&a, &b| deficit(a).total_cmp(&deficit(b)).then(b.cmp(&a)))
                .expect("at least one split is eligible");
            filled[choice] += doc_counts[i];
            books_in[choice] += 1;
            out.push(Split::ALL[choice], books[i].clone());
        }
    }

    for list in [&mut out.train, &mut out.validation, &mut out.test] {
        list.sort_by_key(|b| b.id);
    }
    Ok(out)
}
