//! One-vs-all ensemble over known authors with a reject option.
//!
//! Every known author gets a binary SVM trained on that author's documents
//! against everyone else's. A document whose decision values are all `<= 0`
//! is labelled UNKNOWN; otherwise it goes to the author with the highest
//! value, lowest author id first on ties.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Author, AuthorId};
use crate::error::{Error, Result};
use crate::features::{row_normalize, vectorize_tokens, ChunkSize, ColumnScaler, FeatureVector, Normalization};
use crate::svm::{tune_alpha, AlphaScore, LinearModel, TrainConfig};
use crate::vocab::Vocabulary;

pub const OPEN_SET_MODEL_VERSION: u32 = 1;

/// Predicted or true document label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Author(AuthorId),
    Unknown,
}

impl Label {
    pub fn author(self) -> Option<AuthorId> {
        match self {
            Label::Author(a) => Some(a),
            Label::Unknown => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Author(a) => a.fmt(f),
            Label::Unknown => f.write_str("unknown"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Label::Author(a) => s.serialize_u32(a.0),
            Label::Unknown => s.serialize_str("unknown"),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Id(u32),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Id(id) => Ok(Label::Author(AuthorId(id))),
            Raw::Name(s) if s == "unknown" => Ok(Label::Unknown),
            Raw::Name(s) => Err(serde::de::Error::custom(format!("invalid label {s:?}"))),
        }
    }
}

/// A decision plus the per-author decision values it was derived from.
/// `scores[i]` belongs to the i-th known author of the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub scores: Vec<f64>,
}

impl Prediction {
    pub fn max_score(&self) -> f64 {
        self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Score positions sorted by descending score, lowest position first on
    /// ties.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
    }
}

/// Position of the highest score, lowest position on ties.
fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Open-set rule: UNKNOWN unless some score is strictly positive.
pub fn decide_open(scores: &[f64], authors: &[AuthorId]) -> Label {
    match argmax(scores) {
        Some(i) if scores[i] > 0.0 => Label::Author(authors[i]),
        _ => Label::Unknown,
    }
}

/// Closed-set rule: plain argmax, never UNKNOWN.
pub fn decide_closed(scores: &[f64], authors: &[AuthorId]) -> AuthorId {
    authors[argmax(scores).expect("at least one author")]
}

/// A labelled document as raw counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub book_id: usize,
    pub chunk_index: usize,
    pub label: Label,
    pub counts: FeatureVector,
}

/// Row normalization and column scaling fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureTransform {
    pub normalization: Normalization,
    pub scaler: Option<ColumnScaler>,
}

impl FeatureTransform {
    pub fn fit(normalization: Normalization, train_counts: &[&FeatureVector], dim: usize) -> Result<Self> {
        let scaler = match normalization {
            Normalization::RawCounts => None,
            Normalization::RowMaxColumnMaxAbs => {
                let rows: Vec<FeatureVector> = train_counts.par_iter().map(|c| row_normalize(c)).collect();
                Some(ColumnScaler::fit(&rows, dim)?)
            }
        };
        Ok(FeatureTransform { normalization, scaler })
    }

    pub fn apply(&self, counts: &FeatureVector) -> Result<FeatureVector> {
        match &self.scaler {
            None => Ok(counts.clone()),
            Some(s) => s.apply(&row_normalize(counts)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub train: TrainConfig,
    pub chunk_size: Option<ChunkSize>,
}

/// Tuning outcome for one author.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorTuning {
    pub author: AuthorId,
    pub alpha: f64,
    pub validation_f1: f64,
    pub grid: Vec<AlphaScore>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenSetModel {
    pub version: u32,
    /// Known authors, ascending id; `models[i]` belongs to `authors[i]`.
    pub authors: Vec<Author>,
    pub models: Vec<LinearModel>,
    pub vocabulary: Vocabulary,
    pub transform: FeatureTransform,
    pub config: ModelConfig,
    pub tuning: Vec<AuthorTuning>,
}

/// Input to [`train_open_set`].
pub struct TrainingSet<'a> {
    pub authors: &'a [Author],
    pub train: &'a [Document],
    pub validation: &'a [Document],
}

/// Fits the feature transform on the training rows and trains one tuned
/// binary model per known author.
pub fn train_open_set(
    data: &TrainingSet<'_>,
    vocabulary: &Vocabulary,
    normalization: Normalization,
    config: &ModelConfig,
) -> Result<OpenSetModel> {
    let mut authors = data.authors.to_vec();
    authors.sort_by_key(|a| a.id);
    authors.dedup_by_key(|a| a.id);
    if authors.len() < 2 {
        return Err(Error::TooFewAuthors(authors.len()));
    }
    config.train.validate()?;
    for a in &authors {
        if !data.train.iter().any(|d| d.label == Label::Author(a.id)) {
            return Err(Error::NoTrainingDocuments(a.name.clone()));
        }
    }
    let known = |l: Label| l.author().is_some_and(|id| authors.iter().any(|a| a.id == id));
    if let Some(d) = data.train.iter().find(|d| !known(d.label)) {
        return Err(Error::InvalidArgument(format!(
            "training document from book {} is not labelled with a known author",
            d.book_id
        )));
    }
    let dim = vocabulary.len();
    if let Some(d) = data.train.iter().chain(data.validation).find(|d| d.counts.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: d.counts.dim(),
        });
    }

    let train_counts: Vec<&FeatureVector> = data.train.iter().map(|d| &d.counts).collect();
    let transform = FeatureTransform::fit(normalization, &train_counts, dim)?;
    let train_rows: Vec<FeatureVector> = data.train.par_iter().map(|d| transform.apply(&d.counts)).collect::<Result<_>>()?;
    let val_rows: Vec<FeatureVector> = data
        .validation
        .par_iter()
        .map(|d| transform.apply(&d.counts))
        .collect::<Result<_>>()?;

    let tuned: Vec<_> = authors
        .par_iter()
        .map(|a| {
            let target = Label::Author(a.id);
            let train_labels: Vec<bool> = data.train.iter().map(|d| d.label == target).collect();
            let val_labels: Vec<bool> = data.validation.iter().map(|d| d.label == target).collect();
            tune_alpha(&train_rows, &train_labels, &val_rows, &val_labels, &config.train)
        })
        .collect::<Result<_>>()?;

    let mut models = Vec::with_capacity(tuned.len());
    let mut tuning = Vec::with_capacity(tuned.len());
    for (a, t) in authors.iter().zip(tuned) {
        tuning.push(AuthorTuning {
            author: a.id,
            alpha: t.model.alpha,
            validation_f1: t.validation_f1,
            grid: t.scores,
        });
        models.push(t.model);
    }
    Ok(OpenSetModel {
        version: OPEN_SET_MODEL_VERSION,
        authors,
        models,
        vocabulary: vocabulary.clone(),
        transform,
        config: config.clone(),
        tuning,
    })
}

/// A prediction for free text together with its strongest candidates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub prediction: Prediction,
    pub label_name: String,
    pub top: Vec<RankedAuthor>,
    pub tokens: usize,
    pub vocabulary_hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedAuthor {
    pub author: AuthorId,
    pub name: String,
    pub score: f64,
}

impl OpenSetModel {
    pub fn author_ids(&self) -> Vec<AuthorId> {
        self.authors.iter().map(|a| a.id).collect()
    }

    pub fn dim(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn label_name(&self, label: Label) -> String {
        match label {
            Label::Author(id) => self
                .authors
                .iter()
                .find(|a| a.id == id)
                .map_or_else(|| id.to_string(), |a| a.name.clone()),
            Label::Unknown => "UNKNOWN".to_string(),
        }
    }

    /// Decision values of every author model for a transformed vector.
    pub fn scores(&self, fv: &FeatureVector) -> Result<Vec<f64>> {
        if fv.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: fv.dim(),
            });
        }
        Ok(self.models.iter().map(|m| m.decision_unchecked(fv)).collect())
    }

    /// Open-set prediction for a vector already passed through
    /// [`Self::transform`].
    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction> {
        let scores = self.scores(fv)?;
        Ok(Prediction {
            label: decide_open(&scores, &self.author_ids()),
            scores,
        })
    }

    pub fn predict_closed(&self, fv: &FeatureVector) -> Result<AuthorId> {
        let scores = self.scores(fv)?;
        Ok(decide_closed(&scores, &self.author_ids()))
    }

    pub fn transform(&self, counts: &FeatureVector) -> Result<FeatureVector> {
        self.transform.apply(counts)
    }

    /// Transforms raw counts, then predicts.
    pub fn predict_counts(&self, counts: &FeatureVector) -> Result<Prediction> {
        self.predict(&self.transform(counts)?)
    }

    /// Treats `raw_text` as one whole document.
    pub fn attribute_document(&self, raw_text: &str) -> Result<Attribution> {
        let text = tokenize(raw_text);
        if text.token_count() == 0 {
            return Err(Error::EmptyDocument);
        }
        let counts = vectorize_tokens(text.tokens(), &self.vocabulary);
        let prediction = self.predict_counts(&counts)?;
        let top = prediction
            .ranking()
            .into_iter()
            .take(5)
            .map(|i| RankedAuthor {
                author: self.authors[i].id,
                name: self.authors[i].name.clone(),
                score: prediction.scores[i],
            })
            .collect();
        Ok(Attribution {
            label_name: self.label_name(prediction.label),
            prediction,
            top,
            tokens: text.token_count(),
            vocabulary_hits: counts.values().iter().sum::<f64>() as usize,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: OpenSetModel = serde_json::from_str(s)?;
        if model.version != OPEN_SET_MODEL_VERSION {
            return Err(Error::Version {
                what: "open-set model",
                found: model.version,
            });
        }
        if model.models.len() != model.authors.len() || model.models.iter().any(|m| m.dim() != model.vocabulary.len()) {
            return Err(Error::Parse {
                what: "open-set model",
                message: "author models do not match the author list or vocabulary".into(),
            });
        }
        Ok(model)
    }
}

/// One prediction record: `doc_id,predicted,max_score,second,second_score`
/// with the full score vector appended when `scores` is set.
pub fn format_prediction_record(doc_id: &str, p: &Prediction, authors: &[AuthorId], scores: bool) -> String {
    let ranking = p.ranking();
    let second = ranking.get(1).map(|&i| (authors[i].to_string(), p.scores[i]));
    let mut line = format!(
        "{doc_id},{},{},{},{}",
        p.label,
        p.max_score(),
        second.as_ref().map_or(String::new(), |s| s.0.clone()),
        second.map_or(String::new(), |s| s.1.to_string()),
    );
    if scores {
        for s in &p.scores {
            line.push(',');
            line.push_str(&s.to_string());
        }
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: u32) -> Vec<AuthorId> {
        (0..n).map(AuthorId).collect()
    }

    #[test]
    fn open_rule() {
        assert_eq!(decide_open(&[-0.5, -0.1], &ids(2)), Label::Unknown);
        assert_eq!(decide_open(&[0.3, 0.7], &ids(2)), Label::Author(AuthorId(1)));
        assert_eq!(decide_open(&[0.4, 0.4], &ids(2)), Label::Author(AuthorId(0)));
        assert_eq!(decide_open(&[0.0, 0.0], &ids(2)), Label::Unknown);
        assert_eq!(decide_open(&[], &[]), Label::Unknown);
    }

    #[test]
    fn closed_rule() {
        assert_eq!(decide_closed(&[-0.5, -0.1], &ids(2)), AuthorId(1));
        assert_eq!(decide_closed(&[0.3, 0.7], &ids(2)), AuthorId(1));
        assert_eq!(decide_closed(&[-1.0, -1.0], &ids(2)), AuthorId(0));
    }

    #[test]
    fn label_json() {
        let labels = vec![Label::Author(AuthorId(3)), Label::Unknown];
        let json = serde_json::to_string(&labels).unwrap();
        assert_eq!(json, r#"[3,"unknown"]"#);
        assert_eq!(serde_json::from_str::<Vec<Label>>(&json).unwrap(), labels);
        assert!(serde_json::from_str::<Label>(r#""someone""#).is_err());
    }

    #[test]
    fn prediction_record() {
        let p = Prediction {
            label: Label::Author(AuthorId(1)),
            scores: vec![0.25, 1.5, -0.5],
        };
        let authors = ids(3);
        assert_eq!(format_prediction_record("d7", &p, &authors, false), "d7,1,1.5,0,0.25");
        assert_eq!(format_prediction_record("d7", &p, &authors, true), "d7,1,1.5,0,0.25,0.25,1.5,-0.5");
        let single = Prediction {
            label: Label::Unknown,
            scores: vec![-2.0],
        };
        assert_eq!(format_prediction_record("x", &single, &ids(1), false), "x,unknown,-2,,");
    }
}
