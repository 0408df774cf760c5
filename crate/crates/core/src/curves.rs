//! Threshold sweeps and the areas under the resulting ROC and PR curves.
//!
//! Curves are stored in increasing-threshold order. Both area routines
//! walk them from the highest threshold down, starting from an implicit
//! empty-prediction point `(fpr, tpr) = (0, 0)` that sits above every grid
//! threshold, so a curve whose top threshold already detects everything
//! still gets its full area. The ROC walk also ends at `(1, 1)`: buffered
//! range curves stop short of `fpr = 1` even when every point is predicted.

use serde::{Deserialize, Serialize};

use crate::model::{apply_threshold, ScoredSeries, ThresholdGrid};
use crate::point::confusion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
}

/// Precision used at the implicit empty-prediction anchor by the
/// trapezoidal PR area.
const ANCHOR_PRECISION: f64 = 1.0;

/// One point per grid threshold, ordered by increasing threshold.
pub fn sweep_curve(series: &ScoredSeries, grid: &ThresholdGrid) -> Vec<CurvePoint> {
    grid.values()
        .iter()
        .map(|&th| {
            let pred = apply_threshold(series.score(), th);
            // lengths match by construction
            let c = confusion(series.labels(), &pred).expect("aligned series");
            CurvePoint {
                threshold: th,
                tpr: c.recall(),
                fpr: c.fpr(),
                precision: c.precision(),
            }
        })
        .collect()
}

pub fn auc_roc(curve: &[CurvePoint]) -> f64 {
    let (tpr, fpr): (Vec<f64>, Vec<f64>) = curve.iter().map(|p| (p.tpr, p.fpr)).unzip();
    roc_area(&tpr, &fpr)
}

/// Average precision (stepwise interpolation).
pub fn auc_pr(curve: &[CurvePoint]) -> f64 {
    let (tpr, prec): (Vec<f64>, Vec<f64>) = curve.iter().map(|p| (p.tpr, p.precision)).unzip();
    average_precision(&tpr, &prec)
}

/// Trapezoidal PR area. Known to be optimistic; kept as an alternative to
/// [`auc_pr`].
pub fn auc_pr_trapezoid(curve: &[CurvePoint]) -> f64 {
    let mut area = 0.0;
    let (mut prev_rec, mut prev_prec) = (0.0, ANCHOR_PRECISION);
    for p in curve.iter().rev() {
        area += (prev_prec + p.precision) / 2.0 * (p.tpr - prev_rec);
        prev_rec = p.tpr;
        prev_prec = p.precision;
    }
    area
}

/// Trapezoidal ROC area over rate vectors given in increasing-threshold
/// order.
pub fn roc_area(tpr: &[f64], fpr: &[f64]) -> f64 {
    debug_assert_eq!(tpr.len(), fpr.len());
    let mut area = 0.0;
    let (mut prev_tpr, mut prev_fpr) = (0.0, 0.0);
    for (&t, &f) in tpr.iter().zip(fpr).rev() {
        area += (prev_tpr + t) / 2.0 * (f - prev_fpr);
        prev_tpr = t;
        prev_fpr = f;
    }
    area + (prev_tpr + 1.0) / 2.0 * (1.0 - prev_fpr)
}

/// `Σ precision_k · (recall_k − recall_{k+1})`, inputs in increasing-threshold
/// order. Precision is taken at the lower threshold of each step.
pub fn average_precision(recall: &[f64], precision: &[f64]) -> f64 {
    debug_assert_eq!(recall.len(), precision.len());
    let mut ap = 0.0;
    let mut prev = 0.0;
    for (&r, &p) in recall.iter().zip(precision).rev() {
        ap += p * (r - prev);
        prev = r;
    }
    ap
}
