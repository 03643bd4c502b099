//! Fixed-length document chunks and normalized sparse bag-of-words vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, BookRef, TokenizedBook};
use crate::error::{Error, Result};
use crate::vocab::Vocabulary;

/// Document length: a fixed number of sentences or the whole book.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChunkSize {
    Sentences(usize),
    WholeBook,
}

impl fmt::Display for ChunkSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChunkSize::Sentences(n) => write!(f, "{n}"),
            ChunkSize::WholeBook => f.write_str("whole"),
        }
    }
}

impl std::str::FromStr for ChunkSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("whole") || s.eq_ignore_ascii_case("whole_book") {
            return Ok(ChunkSize::WholeBook);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(ChunkSize::Sentences(n)),
            _ => Err(Error::Parse {
                what: "chunk size",
                message: format!("expected a positive integer or \"whole\", got {s:?}"),
            }),
        }
    }
}

impl Serialize for ChunkSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ChunkSize::Sentences(n) => s.serialize_u64(*n as u64),
            ChunkSize::WholeBook => s.serialize_str("whole"),
        }
    }
}

impl<'de> Deserialize<'de> for ChunkSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => format!("{n}").parse(),
            Raw::S(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentChunk {
    pub source: BookRef,
    pub index: usize,
    pub start_sentence: usize,
    pub length_sentences: usize,
    pub tokens: Vec<String>,
}

/// Cuts a book into consecutive non-overlapping chunks. A trailing partial
/// chunk is dropped, so a book shorter than one chunk yields nothing.
pub fn chunk_book(book: &TokenizedBook, size: ChunkSize) -> Vec<DocumentChunk> {
    let sentences = book.sentences();
    let n = match size {
        ChunkSize::Sentences(n) => n.max(1),
        ChunkSize::WholeBook if sentences.is_empty() => return Vec::new(),
        ChunkSize::WholeBook => sentences.len(),
    };
    sentences
        .chunks_exact(n)
        .enumerate()
        .map(|(index, group)| DocumentChunk {
            source: book.book.clone(),
            index,
            start_sentence: index * n,
            length_sentences: n,
            tokens: group.iter().flatten().cloned().collect(),
        })
        .collect()
}

/// Number of chunks [`chunk_book`] would produce for `sentences` sentences.
pub fn chunk_count(sentences: usize, size: ChunkSize) -> usize {
    match size {
        ChunkSize::Sentences(n) => sentences / n.max(1),
        ChunkSize::WholeBook => usize::from(sentences > 0),
    }
}

/// Sparse non-negative vector with strictly increasing indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    indices: Vec<u32>,
    values: Vec<f64>,
    dim: usize,
}

impl FeatureVector {
    pub fn new(indices: Vec<u32>, values: Vec<f64>, dim: usize) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if indices.len() != values.len() {
            return invalid(format!("{} indices but {} values", indices.len(), values.len()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("indices must be strictly increasing".into());
        }
        if let Some(&last) = indices.last() {
            if last as usize >= dim {
                return invalid(format!("index {last} out of range for dimension {dim}"));
            }
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return invalid(format!("stored values must be positive and finite, got {v}"));
        }
        Ok(FeatureVector { indices, values, dim })
    }

    /// Builds a vector from a dense slice, storing the positive entries.
    pub fn from_dense(dense: &[f64]) -> Result<Self> {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (i as u32, v))
            .unzip();
        FeatureVector::new(indices, values, dense.len())
    }

    pub fn empty(dim: usize) -> Self {
        FeatureVector {
            indices: Vec::new(),
            values: Vec::new(),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().map(|&i| i as usize).zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            dense[i] = v;
        }
        dense
    }

    pub fn max_value(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }
}

/// Raw word counts of `tokens` over `vocab`; unknown tokens are ignored.
pub fn vectorize_tokens<'a, I>(tokens: I, vocab: &Vocabulary) -> FeatureVector
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for token in tokens {
        if let Some(i) = vocab.lookup(token) {
            *counts.entry(i as u32).or_insert(0.0) += 1.0;
        }
    }
    let (indices, values) = counts.into_iter().unzip();
    FeatureVector {
        indices,
        values,
        dim: vocab.len(),
    }
}

pub fn vectorize(chunk: &DocumentChunk, vocab: &Vocabulary) -> FeatureVector {
    vectorize_tokens(chunk.tokens.iter().map(String::as_str), vocab)
}

/// Divides every stored value by the vector's largest value.
pub fn row_normalize(fv: &FeatureVector) -> FeatureVector {
    let mut out = fv.clone();
    if let Some(max) = fv.max_value() {
        for v in &mut out.values {
            *v /= max;
        }
    }
    out
}

/// Column-wise max-abs scaler. Columns never seen in training have maximum
/// zero and pass values through unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaler {
    maxima: Vec<f64>,
}

impl ColumnScaler {
    pub fn fit<'a, I>(rows: I, dim: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a FeatureVector>,
    {
        let mut maxima = vec![0.0f64; dim];
        for row in rows {
            if row.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.dim,
                });
            }
            for (i, v) in row.iter() {
                maxima[i] = maxima[i].max(v.abs());
            }
        }
        Ok(ColumnScaler { maxima })
    }

    pub fn dim(&self) -> usize {
        self.maxima.len()
    }

    pub fn maxima(&self) -> &[f64] {
        &self.maxima
    }

    pub fn apply(&self, fv: &FeatureVector) -> Result<FeatureVector> {
        if fv.dim != self.maxima.len() {
            return Err(Error::DimensionMismatch {
                expected: self.maxima.len(),
                actual: fv.dim,
            });
        }
        let mut out = fv.clone();
        for (v, &i) in out.values.iter_mut().zip(&fv.indices) {
            let m = self.maxima[i as usize];
            if m > 0.0 {
                *v /= m;
            }
        }
        Ok(out)
    }
}

pub fn fit_column_scaler(training_rows: &[FeatureVector]) -> Result<ColumnScaler> {
    let dim = training_rows
        .first()
        .map(FeatureVector::dim)
        .ok_or_else(|| Error::InvalidArgument("cannot fit a scaler on zero rows".into()))?;
    ColumnScaler::fit(training_rows, dim)
}

/// How raw counts are turned into model inputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Row max normalization followed by column max-abs scaling.
    #[default]
    RowMaxColumnMaxAbs,
    RawCounts,
}

/// One labelled document in a feature-matrix dump.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub book_id: usize,
    pub chunk_index: usize,
    pub author: AuthorId,
    pub features: FeatureVector,
}

/// Writes records as `book_id,chunk_index,author_id,i:v i:v ...` lines.
pub fn write_feature_dump<W: Write>(mut out: W, records: &[FeatureRecord]) -> std::io::Result<()> {
    for r in records {
        write!(out, "{},{},{},", r.book_id, r.chunk_index, r.author)?;
        for (n, (i, v)) in r.features.iter().enumerate() {
            if n > 0 {
                out.write_all(b" ")?;
            }
            write!(out, "{i}:{v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_feature_dump<R: BufRead>(input: R, dim: usize) -> Result<Vec<FeatureRecord>> {
    let parse_err = |line: usize, m: &str| Error::Parse {
        what: "feature dump",
        message: format!("line {}: {m}", line + 1),
    };
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<feature dump>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(4, ',');
        let mut next_usize = |name: &str| {
            fields
                .next()
                .and_then(|f| f.trim().parse::<usize>().ok())
                .ok_or_else(|| parse_err(n, &format!("bad {name}")))
        };
        let book_id = next_usize("book_id")?;
        let chunk_index = next_usize("chunk_index")?;
        let author = AuthorId(next_usize("author_id")? as u32);
        let pairs = fields.next().unwrap_or("");
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for pair in pairs.split_whitespace() {
            let (i, v) = pair.split_once(':').ok_or_else(|| parse_err(n, "bad pair"))?;
            indices.push(i.parse().map_err(|_| parse_err(n, "bad index"))?);
            values.push(v.parse().map_err(|_| parse_err(n, "bad value"))?);
        }
        records.push(FeatureRecord {
            book_id,
            chunk_index,
            author,
            features: FeatureVector::new(indices, values, dim)?,
        });
    }
    Ok(records)
}
