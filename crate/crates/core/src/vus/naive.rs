use std::time::Instant;

use super::{BufferAuc, BufferGrid, CurveAccumulator, VusImpl, VusResult};
use crate::model::{extract_ranges, ScoredSeries, ThresholdGrid};
use crate::range_auc::maximal_buffered_labels;

/// Reference implementation: every `(buffer, threshold)` pair touches the
/// whole series.
pub fn vus_naive(series: &ScoredSeries, grid: &ThresholdGrid, buffers: &BufferGrid) -> VusResult {
    let started = Instant::now();
    let score = series.score();
    let labels = series.labels();
    let n = series.len();
    let label_count = series.anomaly_count();

    let mut pred = vec![0u8; n];
    let mut label_thres = vec![0.0f64; n];
    let mut product = vec![0.0f64; n];
    let mut per_buffer: Vec<BufferAuc> = Vec::with_capacity(buffers.len());

    for &buffer in buffers.lengths() {
        let label_l = maximal_buffered_labels(labels, buffer);
        let support: Vec<u8> = label_l.iter().map(|&v| u8::from(v > 0.0)).collect();
        let seq = extract_ranges(&support);
        let mut acc = CurveAccumulator::new(grid.len(), label_count, n);

        for &th in grid.values() {
            for (p, &s) in pred.iter_mut().zip(score) {
                *p = u8::from(s >= th);
            }
            // buffer zones survive only where the prediction is positive
            for i in 0..n {
                label_thres[i] = if labels[i] == 1 {
                    1.0
                } else if pred[i] == 1 {
                    label_l[i]
                } else {
                    0.0
                };
            }
            for i in 0..n {
                product[i] = label_thres[i] * f64::from(pred[i]);
            }
            let sum_pred: usize = pred.iter().map(|&p| usize::from(p)).sum();
            let mut sum_label = 0.0;
            for &v in &label_thres {
                sum_label += v;
            }
            let mut tp = 0.0;
            for &v in &product {
                tp += v;
            }
            let hit = seq
                .iter()
                .filter(|r| product[r.start..=r.end].iter().any(|&v| v > 0.0))
                .count();
            acc.push(tp, sum_pred, sum_label, hit, seq.len());
        }
        per_buffer.push(acc.finish(buffer));
    }

    VusResult::from_per_buffer(
        per_buffer,
        VusImpl::Naive,
        started.elapsed(),
        !series.has_both_classes(),
    )
}
