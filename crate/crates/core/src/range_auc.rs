//! Range-AUC: ROC and PR areas computed against buffered, real-valued
//! labels with an existence-weighted true positive rate.
//!
//! Around every labeled range `[s, e]` a buffer of `ℓ / 2` points per side
//! (integer division) receives the weight `sqrt(1 - d / ℓ)`, where `d` is
//! the distance to the nearest range endpoint. Buffer points only keep
//! their weight where the prediction is positive; overlapping buffers take
//! the pointwise maximum.

use serde::{Deserialize, Serialize};

use crate::curves::{average_precision, roc_area, CurvePoint};
use crate::error::{Error, Result};
use crate::model::{
    apply_threshold, extract_ranges, AnomalyRange, PredictionMask, ScoredSeries, ThresholdGrid,
};

/// `label_ℓ` for one prediction mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousLabels {
    pub values: Vec<f64>,
    pub buffer: usize,
    /// Threshold of the mask the buffer zones were conditioned on.
    pub conditioned_on: f64,
}

impl ContinuousLabels {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BufferedConfusion {
    pub tp_l: f64,
    pub fp_l: f64,
    pub tn_l: f64,
    pub fn_l: f64,
    pub p_l: f64,
    pub n_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RangeRates {
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
}

/// Buffer weight at `distance` points outside a range.
#[inline]
pub fn buffer_weight(distance: usize, buffer: usize) -> f64 {
    (1.0 - distance as f64 / buffer as f64).sqrt()
}

/// Write the unconditioned `label_ℓ` of `ranges` into `out`, where `out[0]`
/// corresponds to series index `offset`. Indices outside the window are
/// skipped; `n` is the full series length used for clipping.
pub fn fill_buffered_labels(
    ranges: &[AnomalyRange],
    buffer: usize,
    n: usize,
    offset: usize,
    out: &mut [f64],
) {
    let half = buffer / 2;
    let window_end = offset + out.len();
    let mut put = |i: usize, w: f64| {
        if i >= offset && i < window_end {
            let slot = &mut out[i - offset];
            if w > *slot {
                *slot = w;
            }
        }
    };
    for r in ranges {
        for i in r.start..=r.end {
            put(i, 1.0);
        }
        if half == 0 {
            continue;
        }
        for i in r.start.saturating_sub(half)..r.start {
            put(i, buffer_weight(r.start - i, buffer));
        }
        for i in (r.end + 1)..(r.end + 1 + half).min(n) {
            put(i, buffer_weight(i - r.end, buffer));
        }
    }
}

/// `label_ℓ` with every buffer point kept (the prediction is all ones).
pub fn maximal_buffered_labels(labels: &[u8], buffer: usize) -> Vec<f64> {
    let mut out = vec![0.0; labels.len()];
    fill_buffered_labels(&extract_ranges(labels), buffer, labels.len(), 0, &mut out);
    out
}

/// Ranges of the buffered support, used for the existence ratio.
pub fn buffered_ranges(labels: &[u8], buffer: usize) -> Vec<AnomalyRange> {
    let support: Vec<u8> = maximal_buffered_labels(labels, buffer)
        .iter()
        .map(|&v| u8::from(v > 0.0))
        .collect();
    extract_ranges(&support)
}

pub fn build_continuous_labels(
    labels: &[u8],
    buffer: usize,
    pred: &PredictionMask,
) -> Result<ContinuousLabels> {
    if labels.len() != pred.len() {
        return Err(Error::usage("labels and prediction differ in length"));
    }
    let mut values = maximal_buffered_labels(labels, buffer);
    for ((v, &l), &p) in values.iter_mut().zip(labels).zip(&pred.bits) {
        if l == 0 && p == 0 {
            *v = 0.0;
        }
    }
    Ok(ContinuousLabels {
        values,
        buffer,
        conditioned_on: pred.threshold,
    })
}

pub fn buffered_confusion(
    cl: &ContinuousLabels,
    labels: &[u8],
    pred: &PredictionMask,
) -> Result<BufferedConfusion> {
    let n = labels.len();
    if cl.values.len() != n || pred.len() != n {
        return Err(Error::usage(
            "continuous labels, labels and prediction differ in length",
        ));
    }
    let mut tp = 0.0;
    let mut sum_label = 0.0;
    let mut sum_pred = 0usize;
    for (&v, &p) in cl.values.iter().zip(&pred.bits) {
        tp += v * f64::from(p);
        sum_label += v;
        sum_pred += usize::from(p);
    }
    let label_count = labels.iter().filter(|&&l| l == 1).count();
    Ok(confusion_from_sums(tp, sum_pred, sum_label, label_count, n))
}

/// Buffered confusion quantities from the three running sums every
/// implementation accumulates.
#[inline]
pub fn confusion_from_sums(
    tp: f64,
    sum_pred: usize,
    sum_label: f64,
    label_count: usize,
    n: usize,
) -> BufferedConfusion {
    let fp = sum_pred as f64 - tp;
    let fn_ = sum_label - tp;
    let p_l = (label_count as f64 + sum_label) / 2.0;
    BufferedConfusion {
        tp_l: tp,
        fp_l: fp,
        fn_l: fn_,
        tn_l: n as f64 - sum_pred as f64 - fn_,
        p_l,
        n_l: n as f64 - p_l,
    }
}

/// Existence-weighted TPR, FPR and precision. Recall is capped at 1.
#[inline]
pub fn rates_from_confusion(bc: &BufferedConfusion, existence: f64) -> RangeRates {
    let recall = if bc.p_l > 0.0 {
        (bc.tp_l / bc.p_l).min(1.0)
    } else {
        0.0
    };
    let fpr = if bc.n_l > 0.0 { bc.fp_l / bc.n_l } else { 0.0 };
    let den = bc.tp_l + bc.fp_l;
    let precision = if den > 0.0 { bc.tp_l / den } else { 0.0 };
    RangeRates {
        tpr: recall * existence,
        fpr,
        precision,
    }
}

/// Fraction of `seq` ranges in which `cl · pred` is positive somewhere.
pub fn existence_ratio(seq: &[AnomalyRange], cl: &ContinuousLabels, pred: &PredictionMask) -> f64 {
    if seq.is_empty() {
        return 0.0;
    }
    let hit = seq
        .iter()
        .filter(|r| (r.start..=r.end).any(|i| cl.values[i] * f64::from(pred.bits[i]) > 0.0))
        .count();
    hit as f64 / seq.len() as f64
}

pub fn range_rates(
    bc: &BufferedConfusion,
    seq: &[AnomalyRange],
    cl: &ContinuousLabels,
    pred: &PredictionMask,
) -> RangeRates {
    rates_from_confusion(bc, existence_ratio(seq, cl, pred))
}

/// Range curve at one buffer length, in increasing-threshold order.
pub fn range_curve(series: &ScoredSeries, grid: &ThresholdGrid, buffer: usize) -> Vec<CurvePoint> {
    let labels = series.labels();
    let seq = buffered_ranges(labels, buffer);
    grid.values()
        .iter()
        .map(|&th| {
            let pred = apply_threshold(series.score(), th);
            let cl = build_continuous_labels(labels, buffer, &pred).expect("aligned series");
            let bc = buffered_confusion(&cl, labels, &pred).expect("aligned series");
            let r = range_rates(&bc, &seq, &cl, &pred);
            CurvePoint {
                threshold: th,
                tpr: r.tpr,
                fpr: r.fpr,
                precision: r.precision,
            }
        })
        .collect()
}

/// Range ROC and PR areas from one curve.
pub fn range_areas(curve: &[CurvePoint]) -> (f64, f64) {
    let tpr: Vec<f64> = curve.iter().map(|p| p.tpr).collect();
    let fpr: Vec<f64> = curve.iter().map(|p| p.fpr).collect();
    let prec: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    (roc_area(&tpr, &fpr), average_precision(&tpr, &prec))
}

pub fn r_auc_roc(series: &ScoredSeries, grid: &ThresholdGrid, buffer: usize) -> f64 {
    range_areas(&range_curve(series, grid, buffer)).0
}

pub fn r_auc_pr(series: &ScoredSeries, grid: &ThresholdGrid, buffer: usize) -> f64 {
    range_areas(&range_curve(series, grid, buffer)).1
}

/// Smallest lag examined when searching the autocorrelation for a period.
const MIN_PERIOD_LAG: usize = 3;
const MAX_PERIOD_LAG: usize = 1000;

/// Period of `values` as the first local maximum of the autocorrelation
/// with positive correlation. `None` for aperiodic or very short input.
pub fn estimate_period(values: &[f64]) -> Option<usize> {
    let n = values.len();
    let max_lag = (n / 2).min(MAX_PERIOD_LAG);
    if max_lag < MIN_PERIOD_LAG + 1 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var: f64 = centered.iter().map(|v| v * v).sum();
    if var == 0.0 {
        return None;
    }
    let acf: Vec<f64> = (0..=max_lag)
        .map(|lag| {
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / var
        })
        .collect();
    (MIN_PERIOD_LAG..max_lag).find(|&k| acf[k] > 0.0 && acf[k] > acf[k - 1] && acf[k] >= acf[k + 1])
}

/// Default buffer length: the estimated period, falling back to the mean
/// anomaly length (and 1 when there are no anomalies either).
pub fn default_buffer(values: Option<&[f64]>, labels: &[u8]) -> usize {
    if let Some(p) = values.and_then(estimate_period) {
        return p;
    }
    let ranges = extract_ranges(labels);
    if ranges.is_empty() {
        return 1;
    }
    let total: usize = ranges.iter().map(|r| r.len()).sum();
    ((total as f64 / ranges.len() as f64).round() as usize).max(1)
}
