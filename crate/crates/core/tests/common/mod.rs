#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vus_core::{BufferGrid, ScoredSeries, ThresholdGrid};

/// One randomized VUS instance.
pub struct Instance {
    pub series: ScoredSeries,
    pub grid: ThresholdGrid,
    pub buffers: BufferGrid,
}

/// Random instance: n in [50, 5000], up to 10 ranges of mixed length,
/// N in {10, 100, 250}, max buffer in {0, 4, 64}. Scores are a mix of
/// noise, smoothed labels and coarsely quantized values (to create ties).
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(50..=5000);
    let alpha = rng.gen_range(0..=10);
    let mut labels = vec![0u8; n];
    for _ in 0..alpha {
        let len = match rng.gen_range(0..3) {
            0 => 1,
            1 => rng.gen_range(2..=20),
            _ => rng.gen_range(20..=200),
        }
        .min(n / 4)
        .max(1);
        let start = rng.gen_range(0..=n - len);
        labels[start..start + len].fill(1);
    }
    let style = rng.gen_range(0..3);
    let score: Vec<f64> = (0..n)
        .map(|i| {
            let noise: f64 = rng.gen();
            match style {
                0 => noise,
                1 => 0.6 * f64::from(labels[i]) + 0.5 * noise,
                _ => ((0.5 * f64::from(labels[i]) + noise) * 8.0).floor() / 8.0,
            }
        })
        .collect();
    let series = ScoredSeries::new(score, labels).unwrap().normalized();
    let intervals = [10, 100, 250][rng.gen_range(0..3)];
    let max_buffer = [0, 4, 64][rng.gen_range(0..3)];
    Instance {
        series,
        grid: ThresholdGrid::uniform(intervals).unwrap(),
        buffers: BufferGrid::up_to(max_buffer),
    }
}

/// Direct transcription of the reference VUS algorithm, written without
/// any of the crate's helpers. Returns `(vus_roc, vus_pr, per-buffer
/// (roc, pr))`.
pub fn vus_oracle(
    score: &[f64],
    labels: &[u8],
    thresholds: &[f64],
    buffers: &[usize],
) -> (f64, f64, Vec<(f64, f64)>) {
    let n = score.len();
    let label_sum: f64 = labels.iter().map(|&l| f64::from(l)).sum();
    let mut ranges = Vec::new();
    let mut i = 0;
    while i < n {
        if labels[i] == 1 {
            let s = i;
            while i + 1 < n && labels[i + 1] == 1 {
                i += 1;
            }
            ranges.push((s, i));
        }
        i += 1;
    }

    let mut per_buffer = Vec::new();
    for &ell in buffers {
        // Create label_ℓ from label and ℓ
        let mut label_l: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let half = ell / 2;
        for &(s, e) in &ranges {
            for j in s.saturating_sub(half)..s {
                let w = (1.0 - (s - j) as f64 / ell as f64).sqrt();
                label_l[j] = label_l[j].max(w);
            }
            for j in e + 1..=(e + half).min(n - 1) {
                let w = (1.0 - (j - e) as f64 / ell as f64).sqrt();
                label_l[j] = label_l[j].max(w);
            }
        }
        // seq = Anomaly_Index(label_ℓ)
        let mut seq = Vec::new();
        let mut j = 0;
        while j < n {
            if label_l[j] > 0.0 {
                let s = j;
                while j + 1 < n && label_l[j + 1] > 0.0 {
                    j += 1;
                }
                seq.push((s, j));
            }
            j += 1;
        }

        let mut tprs = Vec::new();
        let mut fprs = Vec::new();
        let mut precs = Vec::new();
        for &th in thresholds {
            let pred: Vec<f64> = score
                .iter()
                .map(|&v| if v >= th { 1.0 } else { 0.0 })
                .collect();
            let label_thres: Vec<f64> = (0..n)
                .map(|k| {
                    if labels[k] == 1 {
                        1.0
                    } else {
                        label_l[k] * pred[k]
                    }
                })
                .collect();
            let product: Vec<f64> = (0..n).map(|k| label_thres[k] * pred[k]).collect();
            let sum_pred: f64 = pred.iter().sum();
            let mut sum_label = 0.0;
            for v in &label_thres {
                sum_label += v;
            }
            let mut tp = 0.0;
            for v in &product {
                tp += v;
            }
            let fp = sum_pred - tp;
            let p = (label_sum + sum_label) / 2.0;
            let neg = n as f64 - p;
            let detected = seq
                .iter()
                .filter(|&&(s, e)| product[s..=e].iter().sum::<f64>() > 0.0)
                .count();
            let existence = if seq.is_empty() {
                0.0
            } else {
                detected as f64 / seq.len() as f64
            };
            let recall = if p > 0.0 { (tp / p).min(1.0) } else { 0.0 };
            tprs.push(recall * existence);
            fprs.push(if neg > 0.0 { fp / neg } else { 0.0 });
            precs.push(if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 });
        }
        // walk from the highest threshold, starting at (0, 0)
        let mut auc = 0.0;
        let mut ap = 0.0;
        let (mut pt, mut pf) = (0.0, 0.0);
        for k in (0..thresholds.len()).rev() {
            auc += (pt + tprs[k]) / 2.0 * (fprs[k] - pf);
            ap += precs[k] * (tprs[k] - pt);
            pt = tprs[k];
            pf = fprs[k];
        }
        auc += (pt + 1.0) / 2.0 * (1.0 - pf);
        if label_sum as usize == n {
            auc = 0.0;
        }
        per_buffer.push((auc, ap));
    }
    let k = per_buffer.len() as f64;
    let roc = per_buffer.iter().map(|p| p.0).sum::<f64>() / k;
    let pr = per_buffer.iter().map(|p| p.1).sum::<f64>() / k;
    (roc, pr, per_buffer)
}

/// Mann-Whitney estimate of AUC-ROC: fraction of (positive, negative)
/// pairs ranked correctly, ties counting one half.
pub fn pair_counting_auc(score: &[f64], labels: &[u8]) -> f64 {
    let mut good = 0.0;
    let mut pairs = 0.0;
    for (i, &a) in score.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &b) in score.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if a > b {
                good += 1.0;
            } else if a == b {
                good += 0.5;
            }
        }
    }
    good / pairs
}

/// Range precision and recall under the default rewards, by counting the
/// points of each range that fall inside the other set.
pub fn brute_force_range_pr(labels: &[u8], pred: &[u8]) -> (f64, f64) {
    fn runs(bits: &[u8]) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for (i, &b) in bits.iter().enumerate() {
            if b == 1 {
                current.push(i);
            } else if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
        out
    }
    let share = |set: &[Vec<usize>], other: &[u8]| -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        set.iter()
            .map(|r| r.iter().filter(|&&i| other[i] == 1).count() as f64 / r.len() as f64)
            .sum::<f64>()
            / set.len() as f64
    };
    let real = runs(labels);
    let predicted = runs(pred);
    (share(&predicted, labels), share(&real, pred))
}
