use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_binary, LinearModel, TrainConfig};
use crate::error::Result;
use crate::features::FeatureVector;
use crate::metrics::f1_score;

/// Validation F1 reached at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaScore {
    pub alpha: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TunedModel {
    pub model: LinearModel,
    pub validation_f1: f64,
    pub scores: Vec<AlphaScore>,
}

/// F1 of the positive class for sign predictions of `model`.
pub fn binary_f1(model: &LinearModel, rows: &[FeatureVector], labels: &[bool]) -> Result<f64> {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (row, &label) in rows.iter().zip(labels) {
        match (model.decision(row)? > 0.0, label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fneg == 0 { 0.0 } else { tp as f64 / (tp + fneg) as f64 };
    Ok(f1_score(precision, recall))
}

/// Trains one model per grid alpha and keeps the one with the best
/// validation F1; ties go to the larger alpha.
pub fn tune_alpha(
    train_rows: &[FeatureVector],
    train_labels: &[bool],
    validation_rows: &[FeatureVector],
    validation_labels: &[bool],
    cfg: &TrainConfig,
) -> Result<TunedModel> {
    cfg.validate()?;
    if !validation_labels.iter().any(|&l| l) {
        log::warn!("validation set has no positive documents; every alpha scores F1 = 0");
    }
    let candidates: Vec<(LinearModel, f64)> = cfg
        .alpha_grid
        .par_iter()
        .map(|&alpha| {
            let model = train_binary(train_rows, train_labels, alpha, cfg)?;
            let f1 = binary_f1(&model, validation_rows, validation_labels)?;
            Ok((model, f1))
        })
        .collect::<Result<_>>()?;

    let scores = candidates
        .iter()
        .map(|(m, f1)| AlphaScore { alpha: m.alpha, f1: *f1 })
        .collect();
    let (model, validation_f1) = candidates
        .into_iter()
        .reduce(|best, next| {
            let better = next.1 > best.1 || (next.1 == best.1 && next.0.alpha > best.0.alpha);
            if better {
                next
            } else {
                best
            }
        })
        .expect("grid is non-empty");
    Ok(TunedModel {
        model,
        validation_f1,
        scores,
    })
}
