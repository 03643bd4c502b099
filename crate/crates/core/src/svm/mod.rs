//! Binary linear SVMs trained with stochastic subgradient descent on the
//! hinge loss.

mod sgd;
mod tune;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::vocab::Vocabulary;

pub use sgd::{hinge_loss, objective, train_binary, train_binary_traced, TrainTrace};
pub use tune::{binary_f1, tune_alpha, AlphaScore, TunedModel};

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    /// Half the squared Euclidean norm.
    #[default]
    L2,
    L1,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    /// Each class carries `n / (2 * n_class)` per sample.
    #[default]
    Balanced,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub alpha_grid: Vec<f64>,
    pub epochs: usize,
    /// Initial learning rate; probed on the training data when absent.
    pub eta0: Option<f64>,
    pub seed: u64,
    pub class_weighting: ClassWeighting,
    pub regularization: Regularization,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            alpha_grid: default_alpha_grid(),
            epochs: 20,
            eta0: None,
            seed: 42,
            class_weighting: ClassWeighting::Balanced,
            regularization: Regularization::L2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::InvalidArgument("alpha grid is empty".into()));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {a}")));
        }
        if let Some(eta) = self.eta0 {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::InvalidArgument(format!("eta0 must be positive, got {eta}")));
            }
        }
        Ok(())
    }
}

/// Eight values log-spaced over `[1e-6, 1e1]`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..8).map(|i| 10f64.powf(-6.0 + i as f64)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization: Regularization,
    pub alpha: f64,
    pub seed: u64,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w·x + b`.
    pub fn decision(&self, fv: &FeatureVector) -> Result<f64> {
        if fv.dim() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: fv.dim(),
            });
        }
        Ok(self.decision_unchecked(fv))
    }

    pub(crate) fn decision_unchecked(&self, fv: &FeatureVector) -> f64 {
        sparse_dot(&self.weights, fv) + self.bias
    }

    pub fn nonzero_count(&self) -> usize {
        self.weights.iter().filter(|w| **w != 0.0).count()
    }

    /// Up to `n` non-zero coefficients by descending magnitude, paired with
    /// their vocabulary words. Equal magnitudes keep vocabulary order.
    pub fn top_coefficients(&self, n: usize, vocab: &Vocabulary) -> Vec<(String, f64)> {
        let mut nonzero: Vec<(usize, f64)> = self
            .weights
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, w)| *w != 0.0)
            .collect();
        nonzero.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        nonzero
            .into_iter()
            .take(n)
            .map(|(i, w)| (vocab.word(i).to_string(), w))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn top_coefficients(model: &LinearModel, n: usize, vocab: &Vocabulary) -> Vec<(String, f64)> {
    model.top_coefficients(n, vocab)
}

pub(crate) fn sparse_dot(weights: &[f64], fv: &FeatureVector) -> f64 {
    fv.iter().map(|(i, v)| weights[i] * v).sum()
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StoredWeights {
    Dense(Vec<f64>),
    Sparse { indices: Vec<u32>, values: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    reg: Regularization,
    alpha: f64,
    seed: u64,
    bias: f64,
    dim: usize,
    weights: StoredWeights,
}

impl Serialize for LinearModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nnz = self.nonzero_count();
        let weights = if nnz * 2 < self.weights.len() {
            let (indices, values) = self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, *w))
                .unzip();
            StoredWeights::Sparse { indices, values }
        } else {
            StoredWeights::Dense(self.weights.clone())
        };
        ModelFile {
            version: MODEL_VERSION,
            reg: self.regularization,
            alpha: self.alpha,
            seed: self.seed,
            bias: self.bias,
            dim: self.weights.len(),
            weights,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = ModelFile::deserialize(d)?;
        if file.version != MODEL_VERSION {
            return Err(D::Error::custom(format!("unsupported model version {}", file.version)));
        }
        let weights = match file.weights {
            StoredWeights::Dense(w) if w.len() == file.dim => w,
            StoredWeights::Dense(w) => {
                return Err(D::Error::custom(format!("dim {} but {} weights", file.dim, w.len())))
            }
            StoredWeights::Sparse { indices, values } => {
                if indices.len() != values.len() {
                    return Err(D::Error::custom("sparse weights: length mismatch"));
                }
                let mut w = vec![0.0; file.dim];
                for (i, v) in indices.into_iter().zip(values) {
                    *w.get_mut(i as usize)
                        .ok_or_else(|| D::Error::custom(format!("weight index {i} out of range")))? = v;
                }
                w
            }
        };
        if !file.bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(D::Error::custom("non-finite model parameter"));
        }
        Ok(LinearModel {
            weights,
            bias: file.bias,
            regularization: file.reg,
            alpha: file.alpha,
            seed: file.seed,
        })
    }
}
