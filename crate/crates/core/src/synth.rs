//! Seeded synthetic series with labeled range anomalies and an imperfect
//! detector score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{normalize_score, ScoredSeries};

const PLACEMENT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Number of anomalous ranges.
    pub alpha: usize,
    pub mean_len: f64,
    pub std_len: f64,
    /// Series length.
    pub n: usize,
    /// Period of the underlying sine wave in the value channel.
    pub period: usize,
    /// Amplitude of the uniform noise added to the detector score.
    pub score_noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            alpha: 10,
            mean_len: 10.0,
            std_len: 0.0,
            n: 100_000,
            period: 20,
            score_noise: 0.3,
            seed: 0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::usage("series length must be positive"));
        }
        if !(self.mean_len >= 0.0) || !(self.std_len >= 0.0) {
            return Err(Error::usage("anomaly length moments must be non-negative"));
        }
        if self.alpha > 0 && self.alpha as f64 * self.mean_len.max(1.0) >= self.n as f64 {
            return Err(Error::usage(format!(
                "{} anomalies of mean length {} do not fit in {} points",
                self.alpha, self.mean_len, self.n
            )));
        }
        if !(self.score_noise >= 0.0) {
            return Err(Error::usage("score noise must be non-negative"));
        }
        Ok(())
    }
}

/// Values, labels and detector score of one generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries {
    pub values: Vec<f64>,
    pub series: ScoredSeries,
}

pub fn generate(spec: &SynthSpec) -> Result<ScoredSeries> {
    Ok(generate_full(spec)?.series)
}

pub fn generate_full(spec: &SynthSpec) -> Result<SyntheticSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = place_anomalies(spec, &mut rng)?;
    let score = detector_score(&labels, spec, &mut rng);
    let values = value_channel(&labels, spec, &mut rng);
    Ok(SyntheticSeries {
        values,
        series: ScoredSeries::new(score, labels)?,
    })
}

fn draw_lengths(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let normal = Normal::new(spec.mean_len, spec.std_len)
        .map_err(|e| Error::usage(format!("anomaly length distribution: {e}")))?;
    Ok((0..spec.alpha)
        .map(|_| {
            // truncated to >= 1 by redrawing, then clamped
            (0..PLACEMENT_ATTEMPTS)
                .map(|_| normal.sample(rng).round())
                .find(|&v| v >= 1.0)
                .unwrap_or(1.0) as usize
        })
        .collect())
}

fn place_anomalies(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Vec<u8>> {
    let mut labels = vec![0u8; spec.n];
    if spec.alpha == 0 {
        return Ok(labels);
    }
    for _ in 0..PLACEMENT_ATTEMPTS {
        let lengths = draw_lengths(spec, rng)?;
        let occupied: usize = lengths.iter().sum::<usize>() + spec.alpha - 1;
        if occupied > spec.n {
            continue;
        }
        // spread the free points over the alpha + 1 gaps
        let free = spec.n - occupied;
        let mut cuts: Vec<usize> = (0..spec.alpha).map(|_| rng.gen_range(0..=free)).collect();
        cuts.sort_unstable();
        let mut pos = 0;
        let mut prev_cut = 0;
        for (k, (&len, &cut)) in lengths.iter().zip(&cuts).enumerate() {
            pos += cut - prev_cut + usize::from(k > 0);
            prev_cut = cut;
            labels[pos..pos + len].fill(1);
            pos += len;
        }
        return Ok(labels);
    }
    Err(Error::usage(format!(
        "could not place {} anomalies in {} points after {PLACEMENT_ATTEMPTS} attempts",
        spec.alpha, spec.n
    )))
}

/// Labels smoothed by a triangular kernel plus uniform noise, normalized.
fn detector_score(labels: &[u8], spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let half = ((spec.mean_len / 2.0).round() as usize).max(1);
    let weights: Vec<f64> = (0..=2 * half)
        .map(|j| 1.0 - j.abs_diff(half) as f64 / (half + 1) as f64)
        .collect();
    let norm: f64 = weights.iter().sum();
    let n = labels.len();
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let smooth: f64 = weights
                .iter()
                .enumerate()
                .filter_map(|(j, w)| {
                    let idx = (i + j).checked_sub(half)?;
                    (idx < n).then(|| w * f64::from(labels[idx]))
                })
                .sum::<f64>()
                / norm;
            smooth + spec.score_noise * rng.gen::<f64>()
        })
        .collect();
    normalize_score(&raw)
}

fn value_channel(labels: &[u8], spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let period = spec.period.max(2) as f64;
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let phase = 2.0 * std::f64::consts::PI * i as f64 / period;
            let base = if l == 1 {
                0.5 * phase.sin() + 1.0
            } else {
                phase.sin()
            };
            base + 0.1 * (rng.gen::<f64>() - 0.5)
        })
        .collect()
}
