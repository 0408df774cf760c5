//! Point-wise threshold measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PredictionMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }
}

// 0/0 is reported as 0 so threshold sweeps never abort.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn confusion(labels: &[u8], pred: &PredictionMask) -> Result<ConfusionCounts> {
    if labels.len() != pred.len() {
        return Err(Error::usage(format!(
            "labels ({}) and prediction ({}) differ in length",
            labels.len(),
            pred.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&l, &p) in labels.iter().zip(&pred.bits) {
        match (l, p) {
            (1, 1) => c.tp += 1,
            (1, _) => c.fn_ += 1,
            (_, 1) => c.fp += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

pub fn precision(c: &ConfusionCounts) -> f64 {
    c.precision()
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    c.recall()
}

pub fn fpr(c: &ConfusionCounts) -> f64 {
    c.fpr()
}

pub fn f_beta(c: &ConfusionCounts, beta: f64) -> Result<f64> {
    f_beta_from(c.precision(), c.recall(), beta)
}

/// Weighted harmonic mean of a precision/recall pair; 0 when both are 0.
pub fn f_beta_from(precision: f64, recall: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::usage(format!("beta must be positive, got {beta}")));
    }
    let b2 = beta * beta;
    let den = b2 * precision + recall;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 + b2) * precision * recall / den)
}

/// Fraction of the `k` highest-scoring points that are anomalous.
///
/// Ties at the cut are broken toward the lower index.
pub fn precision_at_k(score: &[f64], labels: &[u8], k: usize) -> Result<f64> {
    if score.len() != labels.len() {
        return Err(Error::usage("score and labels differ in length"));
    }
    if k == 0 || k > score.len() {
        return Err(Error::usage(format!(
            "k = {k} outside [1, {}]",
            score.len()
        )));
    }
    let mut order: Vec<usize> = (0..score.len()).collect();
    // stable sort keeps index order within equal scores
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]));
    let hits = order[..k].iter().filter(|&&i| labels[i] == 1).count();
    Ok(hits as f64 / k as f64)
}
