//! Series, label and threshold types shared by every measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An anomaly score paired with its binary ground truth.
///
/// Labels are stored as `u8` in `{0, 1}`. Most measures expect the score to
/// be min-max normalized first (see [`ScoredSeries::normalized`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSeries {
    score: Vec<f64>,
    labels: Vec<u8>,
}

impl ScoredSeries {
    pub fn new(score: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if score.is_empty() {
            return Err(Error::EmptyInput("series has no points".into()));
        }
        if score.len() != labels.len() {
            return Err(Error::usage(format!(
                "score length {} does not match label length {}",
                score.len(),
                labels.len()
            )));
        }
        if let Some(i) = score.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite score at index {i}")));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::invalid(format!(
                "label {} at index {i} is not 0 or 1",
                labels[i]
            )));
        }
        Ok(Self { score, labels })
    }

    pub fn score(&self) -> &[f64] {
        &self.score
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.score.len()
    }

    pub fn is_empty(&self) -> bool {
        self.score.is_empty()
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Copy of this series with the score mapped onto `[0, 1]`.
    pub fn normalized(&self) -> Self {
        Self {
            score: normalize_score(&self.score),
            labels: self.labels.clone(),
        }
    }

    /// Both classes present; curve areas are undefined otherwise.
    pub fn has_both_classes(&self) -> bool {
        let pos = self.anomaly_count();
        pos > 0 && pos < self.len()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<u8>) {
        (self.score, self.labels)
    }
}

/// Inclusive `[start, end]` index range of consecutive anomalous points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnomalyRange {
    pub start: usize,
    pub end: usize,
}

impl AnomalyRange {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of indices shared with `other`.
    pub fn overlap(&self, other: &AnomalyRange) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }
}

/// Ordered thresholds `Th_0 < Th_1 < ... < Th_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    pub const DEFAULT_INTERVALS: usize = 250;

    /// `intervals + 1` evenly spaced thresholds covering `[0, 1]`.
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::usage("threshold grid needs at least one interval"));
        }
        let n = intervals as f64;
        let values = (0..=intervals).map(|k| k as f64 / n).collect();
        Ok(Self { values })
    }

    /// Every distinct score value plus the endpoints 0 and 1.
    pub fn from_scores(score: &[f64]) -> Self {
        let mut values: Vec<f64> = score.iter().copied().filter(|v| v.is_finite()).collect();
        values.push(0.0);
        values.push(1.0);
        values.sort_by(f64::total_cmp);
        values.dedup();
        Self { values }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("threshold grid is empty"));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::usage("thresholds must be strictly increasing"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of intervals `N`; the grid holds `N + 1` values.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Binary prediction obtained by thresholding a normalized score.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMask {
    pub bits: Vec<u8>,
    pub threshold: f64,
}

impl PredictionMask {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn all_ones(n: usize) -> Self {
        Self {
            bits: vec![1; n],
            threshold: f64::NEG_INFINITY,
        }
    }

    pub fn ranges(&self) -> Vec<AnomalyRange> {
        extract_ranges(&self.bits)
    }
}

/// Min-max normalization; a constant score maps to 0.5 everywhere.
pub fn normalize_score(score: &[f64]) -> Vec<f64> {
    let (min, max) = score
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(max > min) {
        return vec![0.5; score.len()];
    }
    let span = max - min;
    score.iter().map(|&v| (v - min) / span).collect()
}

/// Maximal runs of 1s, in index order.
pub fn extract_ranges(labels: &[u8]) -> Vec<AnomalyRange> {
    let mut ranges = Vec::new();
    let mut start = None;
    for (i, &l) in labels.iter().enumerate() {
        match (l != 0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                ranges.push(AnomalyRange::new(s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        ranges.push(AnomalyRange::new(s, labels.len() - 1));
    }
    ranges
}

/// Re-expand ranges into a binary vector of length `n`.
pub fn ranges_to_labels(ranges: &[AnomalyRange], n: usize) -> Vec<u8> {
    let mut labels = vec![0u8; n];
    for r in ranges {
        labels[r.start..=r.end].fill(1);
    }
    labels
}

/// `bits[i] = 1` iff `score[i] >= threshold`.
pub fn apply_threshold(score: &[f64], threshold: f64) -> PredictionMask {
    PredictionMask {
        bits: score.iter().map(|&s| u8::from(s >= threshold)).collect(),
        threshold,
    }
}

/// Mean plus three population standard deviations, clamped into `[0, 1]`.
pub fn default_threshold(score: &[f64]) -> f64 {
    let n = score.len() as f64;
    let mean = score.iter().sum::<f64>() / n;
    let var = score.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean + 3.0 * var.sqrt()).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_score(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize_score(&[3.0, 3.0, 3.0]), vec![0.5, 0.5, 0.5]);
        let v = normalize_score(&[0.1, 0.9, 0.5]);
        assert_abs_diff_eq!(v[0], 0.0);
        assert_abs_diff_eq!(v[1], 1.0);
        assert_abs_diff_eq!(v[2], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ranges_examples() {
        assert_eq!(
            extract_ranges(&[0, 1, 1, 0, 1]),
            vec![AnomalyRange::new(1, 2), AnomalyRange::new(4, 4)]
        );
        assert!(extract_ranges(&[0, 0, 0]).is_empty());
        assert_eq!(extract_ranges(&[1, 1, 1]), vec![AnomalyRange::new(0, 2)]);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(apply_threshold(&[0.2, 0.8], 0.5).bits, vec![0, 1]);
        assert_eq!(apply_threshold(&[0.5], 0.5).bits, vec![1]);
        assert_eq!(
            apply_threshold(&[0.1, 0.4, 0.9, 0.6], 0.55).bits,
            vec![0, 0, 1, 1]
        );
    }

    #[test]
    fn default_threshold_examples() {
        assert_abs_diff_eq!(default_threshold(&[0.5, 0.5]), 0.5);
        assert_abs_diff_eq!(default_threshold(&[0.0, 1.0]), 1.0);
        assert_abs_diff_eq!(default_threshold(&[0.0, 0.0, 0.0, 1.0]), 1.0);
        // unclamped: 0.1 + 3 * 0.0 for a constant low score
        assert_abs_diff_eq!(default_threshold(&[0.1, 0.1, 0.1]), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn series_validation() {
        assert!(matches!(
            ScoredSeries::new(vec![], vec![]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            ScoredSeries::new(vec![1.0], vec![0, 1]),
            Err(Error::Usage(_))
        ));
        assert!(ScoredSeries::new(vec![f64::NAN], vec![0]).is_err());
        assert!(ScoredSeries::new(vec![1.0], vec![2]).is_err());
    }

    #[test]
    fn grid_construction() {
        let g = ThresholdGrid::uniform(4).unwrap();
        assert_eq!(g.values(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.intervals(), 4);
        let g = ThresholdGrid::from_scores(&[0.3, 0.3, 1.0, 0.1]);
        assert_eq!(g.values(), &[0.0, 0.1, 0.3, 1.0]);
        assert!(ThresholdGrid::from_values(vec![0.0, 0.0]).is_err());
        assert!(ThresholdGrid::uniform(0).is_err());
    }

    proptest! {
        #[test]
        fn ranges_round_trip(labels in prop::collection::vec(0u8..2, 1..200)) {
            let ranges = extract_ranges(&labels);
            prop_assert_eq!(ranges_to_labels(&ranges, labels.len()), labels);
            for w in ranges.windows(2) {
                prop_assert!(w[0].end + 1 < w[1].start);
            }
        }

        #[test]
        fn threshold_extremes(score in prop::collection::vec(0.0f64..=1.0, 1..100)) {
            prop_assert!(apply_threshold(&score, 0.0).bits.iter().all(|&b| b == 1));
            prop_assert!(apply_threshold(&score, 1.0 + 1e-9).bits.iter().all(|&b| b == 0));
        }

        #[test]
        fn normalize_idempotent(score in prop::collection::vec(-1e3f64..1e3, 2..100)) {
            let once = normalize_score(&score);
            let twice = normalize_score(&once);
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
