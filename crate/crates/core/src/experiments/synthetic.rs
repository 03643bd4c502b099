//! Deterministic synthetic corpora for desk-scale runs.
//!
//! All authors draw words from one shared pool of pseudo-words. The pool has
//! a Zipf-shaped base distribution and each author tilts it by
//! `exp(separation * z)`, with `z` a per-author, per-word standard normal
//! draw. `separation = 0` makes every author identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CONSONANTS: &[u8] = b"bcdfghjklmnprstvwz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_authors: usize,
    pub books_per_author: usize,
    pub sentences_per_book: usize,
    pub vocab_pool: usize,
    pub separation: f64,
    pub seed: u64,
    /// Extra authors whose books are marked out-of-distribution; the first
    /// half go to validation, the rest to test.
    pub ood_authors: usize,
    pub ood_books_per_author: usize,
    /// Clone one known author's word distribution for every OOD author.
    pub ood_clone_of: Option<usize>,
    pub zipf_exponent: f64,
    /// Rarer words get a wider tilt: word `r` (0-based rank) is tilted by
    /// `separation * (r + 1)^tilt_exponent * z`.
    pub tilt_exponent: f64,
    pub min_sentence_words: usize,
    pub max_sentence_words: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_authors: 8,
            books_per_author: 8,
            sentences_per_book: 600,
            vocab_pool: 1500,
            separation: 0.5,
            seed: 42,
            ood_authors: 0,
            ood_books_per_author: 2,
            ood_clone_of: None,
            zipf_exponent: 1.0,
            tilt_exponent: 0.0,
            min_sentence_words: 8,
            max_sentence_words: 20,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("synthetic corpus: {m}")));
        if self.n_authors == 0 || self.books_per_author == 0 || self.sentences_per_book == 0 {
            return bad("authors, books and sentences must be positive");
        }
        if self.vocab_pool < 2 {
            return bad("vocabulary pool needs at least 2 words");
        }
        if !(self.tilt_exponent.is_finite() && self.tilt_exponent >= 0.0) {
            return bad("tilt exponent must be finite and non-negative");
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad("separation must be finite and non-negative");
        }
        if self.min_sentence_words == 0 || self.min_sentence_words > self.max_sentence_words {
            return bad("invalid sentence length range");
        }
        if self.ood_authors > 0 && self.ood_books_per_author == 0 {
            return bad("OOD authors need at least one book");
        }
        if let Some(c) = self.ood_clone_of {
            if c >= self.n_authors {
                return bad("ood_clone_of names a missing author");
            }
        }
        Ok(())
    }
}

/// Pseudo-word for pool index `i`: the base-90 digits of `i + 90`, one
/// consonant-vowel syllable per digit, so every word has at least two
/// syllables and distinct indices give distinct words.
pub fn pool_word(i: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut n = i + base;
    let mut syllables = Vec::new();
    while n > 0 {
        let d = n % base;
        syllables.push([CONSONANTS[d / VOWELS.len()], VOWELS[d % VOWELS.len()]]);
        n /= base;
    }
    syllables.iter().rev().flat_map(|s| s.iter().map(|&b| b as char)).collect()
}

fn author_weights(spec: &SyntheticSpec, author: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(u64::MAX - author as u64);
    // Log space, shifted by the maximum, so wide tilts cannot overflow.
    let logs: Vec<f64> = (0..spec.vocab_pool)
        .map(|r| {
            let z: f64 = rng.sample(StandardNormal);
            let rank = r as f64 + 1.0;
            -spec.zipf_exponent * rank.ln() + spec.separation * rank.powf(spec.tilt_exponent) * z
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.into_iter().map(|l| (l - max).exp()).collect()
}

fn write_book(spec: &SyntheticSpec, words: &[String], dist: &WeightedIndex<f64>, author: usize, book: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((author as u64) << 32) | book as u64);
    let mut text = String::new();
    for s in 0..spec.sentences_per_book {
        let len = rng.random_range(spec.min_sentence_words..=spec.max_sentence_words);
        for k in 0..len {
            let w = &words[dist.sample(&mut rng)];
            if k == 0 {
                let mut chars = w.chars();
                let first = chars.next().expect("pool words are non-empty");
                text.extend(first.to_uppercase());
                text.push_str(chars.as_str());
            } else {
                text.push(' ');
                text.push_str(w);
                if k + 1 < len && rng.random_ratio(1, 9) {
                    text.push(',');
                }
            }
        }
        text.push('.');
        text.push(if s % 6 == 5 { '\n' } else { ' ' });
    }
    text.push('\n');
    text
}

/// Writes the books and `manifest.csv` under `dir` and returns the manifest
/// path. The same spec always produces byte-identical files.
pub fn make_synthetic_corpus(spec: &SyntheticSpec, dir: &Path) -> Result<PathBuf> {
    spec.validate()?;
    let books_dir = dir.join("books");
    fs::create_dir_all(&books_dir).map_err(|e| Error::io(&books_dir, e))?;
    let words: Vec<String> = (0..spec.vocab_pool).map(pool_word).collect();

    let mut manifest = String::from("author,title,path,role\n");
    let total = spec.n_authors + spec.ood_authors;
    let val_ood = spec.ood_authors.div_ceil(2);
    for author in 0..total {
        let ood = author >= spec.n_authors;
        let weights = match spec.ood_clone_of {
            Some(c) if ood => author_weights(spec, c),
            _ => author_weights(spec, author),
        };
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let (name, role, n_books) = if ood {
            let k = author - spec.n_authors;
            let role = if k < val_ood { "ood_validation" } else { "ood_test" };
            (format!("ood_{k:02}"), role, spec.ood_books_per_author)
        } else {
            (format!("author_{author:02}"), "known", spec.books_per_author)
        };
        for book in 0..n_books {
            let rel = format!("books/{name}_{book:02}.txt");
            let path = dir.join(&rel);
            let text = write_book(spec, &words, &dist, author, book);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            let _ = writeln!(manifest, "{name},{name} book {book},{rel},{role}");
        }
    }
    let manifest_path = dir.join("manifest.csv");
    fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_manifest, tokenize, BookRole};
    use std::collections::HashSet;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            n_authors: 3,
            books_per_author: 3,
            sentences_per_book: 40,
            vocab_pool: 200,
            ood_authors: 3,
            ood_books_per_author: 1,
            ..Default::default()
        }
    }

    #[test]
    fn pool_words_unique_and_valid() {
        let words: Vec<String> = (0..20_000).map(pool_word).collect();
        assert_eq!(words.iter().collect::<HashSet<_>>().len(), words.len());
        assert_eq!(words[0], "beba");
        for w in &words[..500] {
            assert!(crate::corpus::tokenize::is_valid_token(w), "{w}");
            assert!(w.len() >= 4);
        }
    }

    #[test]
    fn byte_identical_for_same_seed() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        make_synthetic_corpus(&small(), a.path()).unwrap();
        make_synthetic_corpus(&small(), b.path()).unwrap();
        for entry in fs::read_dir(a.path().join("books")).unwrap() {
            let entry = entry.unwrap();
            let other = b.path().join("books").join(entry.file_name());
            assert_eq!(fs::read(entry.path()).unwrap(), fs::read(other).unwrap());
        }
        assert_eq!(
            fs::read(a.path().join("manifest.csv")).unwrap(),
            fs::read(b.path().join("manifest.csv")).unwrap()
        );
    }

    #[test]
    fn manifest_and_sentences() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small();
        let manifest = make_synthetic_corpus(&spec, dir.path()).unwrap();
        let corpus = load_manifest(&manifest).unwrap();
        assert_eq!(corpus.authors.len(), 6);
        assert_eq!(corpus.books.iter().filter(|b| b.role == BookRole::Known).count(), 9);
        assert_eq!(corpus.books.iter().filter(|b| b.role == BookRole::OodValidation).count(), 2);
        assert_eq!(corpus.books.iter().filter(|b| b.role == BookRole::OodTest).count(), 1);
        let text = fs::read_to_string(&corpus.books[0].path).unwrap();
        assert_eq!(tokenize(&text).sentence_count(), spec.sentences_per_book);
    }

    #[test]
    fn rejects_bad_specs() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [
            SyntheticSpec { n_authors: 0, ..small() },
            SyntheticSpec { separation: -1.0, ..small() },
            SyntheticSpec { vocab_pool: 1, ..small() },
            SyntheticSpec { ood_clone_of: Some(3), ..small() },
            SyntheticSpec { tilt_exponent: f64::NAN, ..small() },
        ] {
            assert!(make_synthetic_corpus(&spec, dir.path()).is_err());
        }
    }
}
