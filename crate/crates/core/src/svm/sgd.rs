use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sparse_dot, ClassWeighting, LinearModel, Regularization, TrainConfig};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Rows used when probing for the initial learning rate.
const PROBE_ROWS: usize = 1000;

/// Rescale the L2 weight representation once its scale drops below this.
const MIN_SCALE: f64 = 1e-9;

pub fn hinge_loss(label: bool, decision: f64) -> f64 {
    let y = if label { 1.0 } else { -1.0 };
    (1.0 - y * decision).max(0.0)
}

fn class_weights(labels: &[bool], weighting: ClassWeighting) -> Result<[f64; 2]> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok(match weighting {
        ClassWeighting::Balanced => {
            let n = labels.len() as f64;
            [n / (2.0 * neg as f64), n / (2.0 * pos as f64)]
        }
        ClassWeighting::None => [1.0, 1.0],
    })
}

fn penalty(weights: &[f64], reg: Regularization) -> f64 {
    match reg {
        Regularization::L2 => 0.5 * weights.iter().map(|w| w * w).sum::<f64>(),
        Regularization::L1 => weights.iter().map(|w| w.abs()).sum(),
    }
}

/// Mean class-weighted hinge loss plus `alpha` times the regularizer.
pub fn objective(
    weights: &[f64],
    bias: f64,
    rows: &[FeatureVector],
    labels: &[bool],
    alpha: f64,
    reg: Regularization,
    weighting: ClassWeighting,
) -> Result<f64> {
    let cw = class_weights(labels, weighting)?;
    Ok(weighted_objective(weights, bias, rows, labels, &cw, alpha, reg, None))
}

#[allow(clippy::too_many_arguments)]
fn weighted_objective(
    weights: &[f64],
    bias: f64,
    rows: &[FeatureVector],
    labels: &[bool],
    cw: &[f64; 2],
    alpha: f64,
    reg: Regularization,
    subset: Option<&[usize]>,
) -> f64 {
    let loss = |i: usize| cw[labels[i] as usize] * hinge_loss(labels[i], sparse_dot(weights, &rows[i]) + bias);
    let (total, n) = match subset {
        Some(idx) => (idx.iter().map(|&i| loss(i)).sum::<f64>(), idx.len()),
        None => ((0..rows.len()).map(loss).sum::<f64>(), rows.len()),
    };
    total / n as f64 + alpha * penalty(weights, reg)
}

/// Per-epoch record of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    pub eta0: f64,
    /// Full training objective after each epoch.
    pub epoch_objectives: Vec<f64>,
}

/// SGD state. L2 weights are stored as `scale * v` so the shrink step is
/// O(1); L1 keeps `scale = 1` and clips with a cumulative penalty.
struct Sgd<'a> {
    rows: &'a [FeatureVector],
    labels: &'a [bool],
    cw: [f64; 2],
    alpha: f64,
    reg: Regularization,
    eta0: f64,
    v: Vec<f64>,
    scale: f64,
    bias: f64,
    t: f64,
    // L1 bookkeeping: total penalty any weight could have received, and the
    // penalty each weight actually received.
    u: f64,
    q: Vec<f64>,
}

impl<'a> Sgd<'a> {
    fn new(rows: &'a [FeatureVector], labels: &'a [bool], cw: [f64; 2], alpha: f64, reg: Regularization, eta0: f64) -> Self {
        let dim = rows[0].dim();
        Sgd {
            rows,
            labels,
            cw,
            alpha,
            reg,
            eta0,
            v: vec![0.0; dim],
            scale: 1.0,
            bias: 0.0,
            t: 0.0,
            u: 0.0,
            q: match reg {
                Regularization::L1 => vec![0.0; dim],
                Regularization::L2 => Vec::new(),
            },
        }
    }

    fn step(&mut self, i: usize) {
        let x = &self.rows[i];
        let label = self.labels[i];
        let y = if label { 1.0 } else { -1.0 };
        let decay = 1.0 + self.eta0 * self.alpha * self.t;
        let eta = self.eta0 / decay;
        // The bias is unregularized, so the objective is not strongly convex
        // along it and a 1/t step stalls; it gets 1/sqrt(t) instead.
        let eta_bias = self.eta0 / decay.sqrt();
        let margin = y * (self.scale * sparse_dot(&self.v, x) + self.bias);

        if self.reg == Regularization::L2 {
            let shrink = 1.0 - eta * self.alpha;
            if shrink <= 0.0 {
                self.v.iter_mut().for_each(|w| *w = 0.0);
                self.scale = 1.0;
            } else {
                self.scale *= shrink;
            }
        }

        if margin < 1.0 {
            let g = self.cw[label as usize] * y;
            let step = eta * g / self.scale;
            for (j, xj) in x.iter() {
                self.v[j] += step * xj;
            }
            self.bias += eta_bias * g;
        }

        match self.reg {
            Regularization::L2 => {
                if self.scale < MIN_SCALE {
                    let s = self.scale;
                    self.v.iter_mut().for_each(|w| *w *= s);
                    self.scale = 1.0;
                }
            }
            Regularization::L1 => {
                self.u += eta * self.alpha;
                for &j in x.indices() {
                    let j = j as usize;
                    let z = self.v[j];
                    if z > 0.0 {
                        self.v[j] = (z - (self.u + self.q[j])).max(0.0);
                    } else if z < 0.0 {
                        self.v[j] = (z + (self.u - self.q[j])).min(0.0);
                    }
                    self.q[j] += self.v[j] - z;
                }
            }
        }
        self.t += 1.0;
    }

    fn weights(&self) -> Vec<f64> {
        self.v.iter().map(|w| w * self.scale).collect()
    }

    fn objective(&self, subset: Option<&[usize]>) -> f64 {
        weighted_objective(&self.weights(), self.bias, self.rows, self.labels, &self.cw, self.alpha, self.reg, subset)
    }
}

/// Picks the initial learning rate from `2^-10 .. 2^3` by running one epoch
/// of the real schedule on a sample and keeping the lowest objective.
fn probe_eta0(
    rows: &[FeatureVector],
    labels: &[bool],
    cw: [f64; 2],
    alpha: f64,
    reg: Regularization,
    order: &[usize],
) -> f64 {
    let sample = &order[..order.len().min(PROBE_ROWS)];
    let mut best = (f64::INFINITY, 1.0);
    for k in -10..=3 {
        let eta = 2f64.powi(k);
        let mut sgd = Sgd::new(rows, labels, cw, alpha, reg, eta);
        for &i in sample {
            sgd.step(i);
        }
        let obj = sgd.objective(Some(sample));
        if obj.is_finite() && obj < best.0 {
            best = (obj, eta);
        }
    }
    best.1
}

fn validate_rows(rows: &[FeatureVector], labels: &[bool]) -> Result<()> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let dim = rows.first().map(FeatureVector::dim).ok_or(Error::SingleClass)?;
    for (r, row) in rows.iter().enumerate() {
        if row.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: row.dim(),
            });
        }
        if row.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: r });
        }
    }
    Ok(())
}

pub fn train_binary(rows: &[FeatureVector], labels: &[bool], alpha: f64, cfg: &TrainConfig) -> Result<LinearModel> {
    train_binary_traced(rows, labels, alpha, cfg).map(|(m, _)| m)
}

/// Trains one binary model at a fixed `alpha`. `labels[i]` is true for the
/// positive class. Deterministic in `cfg.seed`.
pub fn train_binary_traced(
    rows: &[FeatureVector],
    labels: &[bool],
    alpha: f64,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainTrace)> {
    if cfg.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be at least 1".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    validate_rows(rows, labels)?;
    let cw = class_weights(labels, cfg.class_weighting)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);

    let eta0 = match cfg.eta0 {
        Some(eta) => eta,
        None => probe_eta0(rows, labels, cw, alpha, cfg.regularization, &order),
    };
    let mut sgd = Sgd::new(rows, labels, cw, alpha, cfg.regularization, eta0);
    let mut trace = TrainTrace {
        eta0,
        epoch_objectives: Vec::with_capacity(cfg.epochs),
    };
    for epoch in 0..cfg.epochs {
        if epoch > 0 {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            sgd.step(i);
        }
        trace.epoch_objectives.push(sgd.objective(None));
    }

    let weights = sgd.weights();
    if !sgd.bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "training diverged (alpha {alpha}, eta0 {eta0})"
        )));
    }
    Ok((
        LinearModel {
            weights,
            bias: sgd.bias,
            regularization: cfg.regularization,
            alpha,
            seed: cfg.seed,
        },
        trace,
    ))
}
