//! Range-based precision, recall and F-score with existence and overlap
//! rewards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AnomalyRange;
use crate::point::f_beta_from;

/// Cardinality factor applied when a range overlaps several others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Cardinality {
    #[default]
    One,
    /// `1 / x` where `x` is the number of distinct overlapping ranges.
    Reciprocal,
}

/// Positional weighting of the points inside a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PositionalBias {
    #[default]
    Flat,
}

/// Size function for the overlap reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OverlapSize {
    #[default]
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeRewardConfig {
    /// Weight of the existence reward in range recall.
    pub alpha: f64,
    pub gamma: Cardinality,
    pub delta: PositionalBias,
    pub omega: OverlapSize,
}

impl Default for RangeRewardConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            gamma: Cardinality::One,
            delta: PositionalBias::Flat,
            omega: OverlapSize::Ratio,
        }
    }
}

impl RangeRewardConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::usage(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

pub fn existence_reward(r: &AnomalyRange, others: &[AnomalyRange]) -> u8 {
    u8::from(others.iter().any(|p| r.overlap(p) >= 1))
}

fn positional_weight(_bias: PositionalBias, _offset: usize, _len: usize) -> f64 {
    1.0
}

// omega(r, r ∩ p, delta): weighted share of `r` covered by `p`.
fn omega(cfg: &RangeRewardConfig, r: &AnomalyRange, p: &AnomalyRange) -> f64 {
    let lo = r.start.max(p.start);
    let hi = r.end.min(p.end);
    if lo > hi {
        return 0.0;
    }
    match cfg.omega {
        OverlapSize::Ratio => {
            let len = r.len();
            let covered: f64 = (lo..=hi)
                .map(|i| positional_weight(cfg.delta, i - r.start, len))
                .sum();
            let total: f64 = (0..len)
                .map(|off| positional_weight(cfg.delta, off, len))
                .sum();
            covered / total
        }
    }
}

fn cardinality_factor(cfg: &RangeRewardConfig, r: &AnomalyRange, others: &[AnomalyRange]) -> f64 {
    match cfg.gamma {
        Cardinality::One => 1.0,
        Cardinality::Reciprocal => {
            let hits = others.iter().filter(|p| r.overlap(p) >= 1).count();
            if hits > 1 {
                1.0 / hits as f64
            } else {
                1.0
            }
        }
    }
}

/// `CF(r, others) * Σ ω(r, r ∩ o)`. Under the defaults this is the share of
/// `r` covered by `others` (which never overlap each other).
pub fn overlap_reward(r: &AnomalyRange, others: &[AnomalyRange], cfg: &RangeRewardConfig) -> f64 {
    let sum: f64 = others.iter().map(|p| omega(cfg, r, p)).sum();
    cardinality_factor(cfg, r, others) * sum
}

pub fn r_recall(
    real: &[AnomalyRange],
    pred: &[AnomalyRange],
    cfg: &RangeRewardConfig,
) -> Result<f64> {
    cfg.validate()?;
    if real.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = real
        .iter()
        .map(|r| {
            cfg.alpha * f64::from(existence_reward(r, pred))
                + (1.0 - cfg.alpha) * overlap_reward(r, pred, cfg)
        })
        .sum();
    Ok(total / real.len() as f64)
}

/// Mean overlap reward of the predicted ranges; no existence term.
pub fn r_precision(
    real: &[AnomalyRange],
    pred: &[AnomalyRange],
    cfg: &RangeRewardConfig,
) -> Result<f64> {
    cfg.validate()?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = pred.iter().map(|p| overlap_reward(p, real, cfg)).sum();
    Ok(total / pred.len() as f64)
}

pub fn rf_score(
    real: &[AnomalyRange],
    pred: &[AnomalyRange],
    cfg: &RangeRewardConfig,
    beta: f64,
) -> Result<f64> {
    let p = r_precision(real, pred, cfg)?;
    let r = r_recall(real, pred, cfg)?;
    f_beta_from(p, r, beta)
}
