//! Score and label perturbations used by the robustness and separability
//! protocols: lag, additive noise, and a change of the anomalous-point
//! ratio.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{extract_ranges, normalize_score, ScoredSeries};

/// Grid size of every default perturbation plan.
pub const GRID_SIZE: usize = 10;
/// Lag bound as a fraction of the buffer length ℓ.
pub const LAG_FRACTION: f64 = 0.25;
/// Noise bound as a fraction of the score's range.
pub const NOISE_FRACTION: f64 = 0.05;
pub const RATIO_MIN: f64 = 0.01;
pub const RATIO_MAX: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Lag,
    Noise,
    Ratio,
}

impl PerturbationKind {
    pub const ALL: [PerturbationKind; 3] = [
        PerturbationKind::Lag,
        PerturbationKind::Noise,
        PerturbationKind::Ratio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::Lag => "lag",
            PerturbationKind::Noise => "noise",
            PerturbationKind::Ratio => "ratio",
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lag" => Ok(PerturbationKind::Lag),
            "noise" => Ok(PerturbationKind::Noise),
            "ratio" => Ok(PerturbationKind::Ratio),
            other => Err(Error::usage(format!("unknown perturbation `{other}`"))),
        }
    }
}

/// One perturbation kind with its parameter grid.
///
/// Grid units depend on the kind: lags are point offsets, noise amplitudes
/// are fractions of the perturbed score's range, ratios are anomalous
/// points over total points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub grid: Vec<f64>,
    pub seed: u64,
}

impl PerturbationSpec {
    /// Ten lags evenly spaced over `[-ℓ/4, ℓ/4]`, rounded to integers.
    pub fn lag(buffer: usize, seed: u64) -> Self {
        let bound = LAG_FRACTION * buffer as f64;
        Self {
            kind: PerturbationKind::Lag,
            grid: linspace(-bound, bound, GRID_SIZE)
                .into_iter()
                .map(f64::round)
                .collect(),
            seed,
        }
    }

    /// Ten relative amplitudes evenly spaced over `[-0.05, 0.05]`.
    pub fn noise(seed: u64) -> Self {
        Self {
            kind: PerturbationKind::Noise,
            grid: linspace(-NOISE_FRACTION, NOISE_FRACTION, GRID_SIZE),
            seed,
        }
    }

    /// Ten ratios evenly spaced over `[0.01, 0.2]`. Removing normal points
    /// can only raise the ratio, so targets below the series' current
    /// ratio are clamped up to it.
    pub fn ratio(series: &ScoredSeries, seed: u64) -> Self {
        let current = series.anomaly_count() as f64 / series.len() as f64;
        Self {
            kind: PerturbationKind::Ratio,
            grid: linspace(RATIO_MIN, RATIO_MAX, GRID_SIZE)
                .into_iter()
                .map(|r| r.max(current))
                .collect(),
            seed,
        }
    }

    /// A plan whose every grid point leaves the series unchanged.
    pub fn identity(kind: PerturbationKind, series: &ScoredSeries) -> Self {
        let value = match kind {
            PerturbationKind::Lag | PerturbationKind::Noise => 0.0,
            PerturbationKind::Ratio => series.anomaly_count() as f64 / series.len() as f64,
        };
        Self {
            kind,
            grid: vec![value; GRID_SIZE],
            seed: 0,
        }
    }

    /// Default plan of `kind` for a series with buffer length `buffer`.
    pub fn default_for(
        kind: PerturbationKind,
        series: &ScoredSeries,
        buffer: usize,
        seed: u64,
    ) -> Self {
        match kind {
            PerturbationKind::Lag => Self::lag(buffer, seed),
            PerturbationKind::Noise => Self::noise(seed),
            PerturbationKind::Ratio => Self::ratio(series, seed),
        }
    }

    /// Apply grid point `index` to `series`.
    pub fn apply(&self, series: &ScoredSeries, index: usize) -> Result<ScoredSeries> {
        let param = *self
            .grid
            .get(index)
            .ok_or_else(|| Error::usage(format!("grid index {index} out of range")))?;
        // each grid point draws from its own stream
        let seed = self.seed.wrapping_add(index as u64);
        match self.kind {
            PerturbationKind::Lag => {
                let score = perturb_lag(series.score(), param as i64)?;
                ScoredSeries::new(score, series.labels().to_vec())
            }
            PerturbationKind::Noise => {
                let amplitude = param * score_span(series.score());
                let score = perturb_noise(series.score(), amplitude, seed);
                ScoredSeries::new(score, series.labels().to_vec())
            }
            PerturbationKind::Ratio => perturb_ratio(series, param, seed),
        }
    }
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

fn score_span(score: &[f64]) -> f64 {
    let max = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = score.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Shift the score right by `lag` points (left when negative), filling the
/// vacated positions with the nearest edge value.
pub fn perturb_lag(score: &[f64], lag: i64) -> Result<Vec<f64>> {
    let n = score.len() as i64;
    if lag.unsigned_abs() >= n as u64 {
        return Err(Error::usage(format!(
            "lag {lag} must be shorter than the series ({n})"
        )));
    }
    Ok((0..n)
        .map(|i| score[(i - lag).clamp(0, n - 1) as usize])
        .collect())
}

/// Add per-point uniform noise in `[-|amplitude|, |amplitude|]`, then
/// min-max normalize. A zero amplitude returns the score unchanged.
pub fn perturb_noise(score: &[f64], amplitude: f64, seed: u64) -> Vec<f64> {
    let a = amplitude.abs();
    if a == 0.0 {
        return score.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy: Vec<f64> = score.iter().map(|&v| v + rng.gen_range(-a..=a)).collect();
    normalize_score(&noisy)
}

/// Raise the anomalous-point ratio to `target` by deleting normal points.
///
/// Normal stretches are cut into blocks of the mean anomaly length. Blocks
/// farthest from any anomaly are removed first (ties in random order under
/// `seed`); the normal points touching an anomaly are never removed, so
/// ranges keep their count and never merge. The last block is trimmed so
/// the ratio lands on `target` up to one point.
pub fn perturb_ratio(series: &ScoredSeries, target: f64, seed: u64) -> Result<ScoredSeries> {
    let n = series.len();
    let anomalies = series.anomaly_count();
    if anomalies == 0 {
        return Err(Error::usage(
            "cannot change the anomaly ratio of a series without anomalies",
        ));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::usage(format!(
            "target ratio must lie in (0, 1], got {target}"
        )));
    }
    let keep_total = (anomalies as f64 / target).round() as usize;
    if keep_total > n {
        return Err(Error::usage(format!(
            "target ratio {target} is below the current ratio {:.6}; only normal points are removed",
            anomalies as f64 / n as f64
        )));
    }
    if keep_total == n {
        return Ok(series.clone());
    }
    let to_remove = n - keep_total;

    let labels = series.labels();
    let ranges = extract_ranges(labels);
    let distance = distance_to_anomaly(labels);
    let block_len = {
        let total: usize = ranges.iter().map(|r| r.len()).sum();
        ((total as f64 / ranges.len() as f64).round() as usize).max(1)
    };

    // removable points: normal and not adjacent to an anomaly
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if distance[i] < 2 {
            i += 1;
            continue;
        }
        let s = i;
        while i < n && distance[i] >= 2 && i - s < block_len {
            i += 1;
        }
        blocks.push((s, i));
    }
    let removable: usize = blocks.iter().map(|(s, e)| e - s).sum();
    if removable < to_remove {
        return Err(Error::usage(format!(
            "target ratio {target} unreachable: needs {to_remove} normal points removed, only {removable} are removable"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    blocks.shuffle(&mut rng);
    let block_distance =
        |&(s, e): &(usize, usize)| distance[s..e].iter().copied().min().unwrap_or(0);
    blocks.sort_by_key(|b| std::cmp::Reverse(block_distance(b)));

    let mut drop = vec![false; n];
    let mut left = to_remove;
    for (s, e) in blocks {
        if left == 0 {
            break;
        }
        // trim the final block from the side farther from anomalies
        let take = (e - s).min(left);
        let (from, to) = if distance[s] >= distance[e - 1] {
            (s, s + take)
        } else {
            (e - take, e)
        };
        drop[from..to].fill(true);
        left -= take;
    }

    let (score, labels): (Vec<f64>, Vec<u8>) = series
        .score()
        .iter()
        .zip(labels)
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|((&v, &l), _)| (v, l))
        .unzip();
    ScoredSeries::new(score, labels)
}

/// Distance from each point to the nearest anomalous point (0 on
/// anomalies, `usize::MAX` when there are none).
fn distance_to_anomaly(labels: &[u8]) -> Vec<usize> {
    let n = labels.len();
    let mut d = vec![usize::MAX; n];
    let mut last = None;
    for i in 0..n {
        if labels[i] == 1 {
            last = Some(i);
        }
        if let Some(p) = last {
            d[i] = i - p;
        }
    }
    last = None;
    for i in (0..n).rev() {
        if labels[i] == 1 {
            last = Some(i);
        }
        if let Some(p) = last {
            d[i] = d[i].min(p - i);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};
    use proptest::prelude::*;
    use rand::Rng;

    fn series(n: usize, ranges: &[(usize, usize)]) -> ScoredSeries {
        let mut labels = vec![0u8; n];
        for &(s, e) in ranges {
            labels[s..=e].fill(1);
        }
        let score = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        ScoredSeries::new(score, labels).unwrap()
    }

    #[test]
    fn lag_examples() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(perturb_lag(&s, 0).unwrap(), s);
        assert_eq!(perturb_lag(&s, 1).unwrap(), [1.0, 1.0, 2.0, 3.0]);
        assert_eq!(perturb_lag(&s, -1).unwrap(), [2.0, 3.0, 4.0, 4.0]);
        assert_eq!(perturb_lag(&s, 3).unwrap(), [1.0; 4]);
        assert!(perturb_lag(&s, 4).is_err());
        assert!(perturb_lag(&s, -4).is_err());
    }

    #[test]
    fn noise_examples() {
        let s = [0.1, 0.5, 0.9];
        assert_eq!(perturb_noise(&s, 0.0, 1), s);
        let a = perturb_noise(&s, 0.05, 9);
        assert_eq!(a, perturb_noise(&s, 0.05, 9));
        assert_eq!(a, perturb_noise(&s, -0.05, 9));
        assert_ne!(a, perturb_noise(&s, 0.05, 10));
        assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn noise_on_constant_score_stays_within_bound() {
        // the raw spread is at most 2a; after normalization the range is [0, 1]
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = 0.3;
        let raw: Vec<f64> = (0..200).map(|_| 0.5 + rng.gen_range(-a..=a)).collect();
        let spread = score_span(&raw);
        assert!(spread <= 2.0 * a);
        let out = perturb_noise(&[0.5; 200], a, 4);
        assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ratio_identity_at_current_density() {
        let s = series(200, &[(50, 59)]);
        assert_eq!(perturb_ratio(&s, 0.05, 0).unwrap(), s);
    }

    #[test]
    fn ratio_doubling_halves_normals() {
        let s = series(400, &[(50, 59), (300, 309)]);
        let out = perturb_ratio(&s, 0.10, 3).unwrap();
        assert_eq!(out.len(), 200);
        assert_eq!(out.anomaly_count(), 20);
        assert_eq!(extract_ranges(out.labels()).len(), 2);
    }

    #[test]
    fn ratio_unreachable_or_lowering_is_error() {
        let s = series(200, &[(50, 59)]);
        assert_eq!(perturb_ratio(&s, 0.9, 0).unwrap_err().kind(), "usage");
        assert_eq!(perturb_ratio(&s, 0.01, 0).unwrap_err().kind(), "usage");
        let none = series(50, &[]);
        assert!(perturb_ratio(&none, 0.1, 0).is_err());
    }

    #[test]
    fn ratio_removes_far_points_first() {
        let s = series(300, &[(10, 19)]);
        let out = perturb_ratio(&s, 0.1, 0).unwrap();
        assert_eq!(out.len(), 100);
        // the stretch right after the anomaly survives; the tail goes
        let kept_score = &out.score()[..30];
        assert_eq!(kept_score, &s.score()[..30]);
    }

    #[test]
    fn default_grids() {
        let lag = PerturbationSpec::lag(40, 0);
        assert_eq!(lag.grid.len(), GRID_SIZE);
        assert_eq!(lag.grid[0], -10.0);
        assert_eq!(lag.grid[9], 10.0);
        let noise = PerturbationSpec::noise(0);
        assert!((noise.grid[0] + 0.05).abs() < 1e-15 && (noise.grid[9] - 0.05).abs() < 1e-15);
        let dense = series(100, &[(10, 29)]);
        let ratio = PerturbationSpec::ratio(&dense, 0);
        assert!(ratio.grid.iter().all(|&r| r >= 0.2 - 1e-12));
    }

    #[test]
    fn identity_plan_leaves_series() {
        let s = series(300, &[(40, 49), (200, 203)]);
        for kind in PerturbationKind::ALL {
            let plan = PerturbationSpec::identity(kind, &s);
            for i in 0..GRID_SIZE {
                assert_eq!(plan.apply(&s, i).unwrap(), s, "{kind}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn ratio_preserves_anomalies(seed in any::<u64>(), target in 0.01f64..0.2) {
            let s = generate(&SynthSpec { n: 2_000, alpha: 5, mean_len: 8.0, seed, ..Default::default() }).unwrap();
            let target = target.max(s.anomaly_count() as f64 / s.len() as f64);
            let out = perturb_ratio(&s, target, seed).unwrap();
            prop_assert_eq!(out.anomaly_count(), s.anomaly_count());
            prop_assert_eq!(extract_ranges(out.labels()).len(), 5);
            let got = out.anomaly_count() as f64 / out.len() as f64;
            prop_assert!((got - target).abs() <= target * 2.0 / out.len() as f64 + 1e-12);
        }

        #[test]
        fn lag_keeps_length(lag in -20i64..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let score: Vec<f64> = (0..50).map(|_| rng.gen()).collect();
            let out = perturb_lag(&score, lag).unwrap();
            prop_assert_eq!(out.len(), score.len());
            if lag >= 0 {
                prop_assert_eq!(&out[lag as usize..], &score[..50 - lag as usize]);
            }
        }
    }
}
