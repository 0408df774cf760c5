use std::time::Instant;

use super::segments::build_segment_map;
use super::{BufferAuc, BufferGrid, CurveAccumulator, VusImpl, VusResult, DEFAULT_MEMORY_BUDGET};
use crate::error::{Error, Result};
use crate::model::{extract_ranges, AnomalyRange, ScoredSeries, ThresholdGrid};
use crate::range_auc::fill_buffered_labels;

/// Static/dynamic split without stored predictions.
pub fn vus_opt(series: &ScoredSeries, grid: &ThresholdGrid, buffers: &BufferGrid) -> VusResult {
    let started = Instant::now();
    let sum_pred = prediction_counts(series.score(), grid);
    let source = Predictions::Recompute {
        score: series.score(),
        grid: grid.values(),
    };
    let per_buffer = dynamic_pass(series, grid, buffers, &sum_pred, &source);
    VusResult::from_per_buffer(
        per_buffer,
        VusImpl::Opt,
        started.elapsed(),
        !series.has_both_classes(),
    )
}

/// Static/dynamic split reusing one stored prediction mask per threshold.
pub fn vus_opt_mem(
    series: &ScoredSeries,
    grid: &ThresholdGrid,
    buffers: &BufferGrid,
) -> Result<VusResult> {
    vus_opt_mem_with_budget(series, grid, buffers, DEFAULT_MEMORY_BUDGET)
}

/// [`vus_opt_mem`] with an explicit cap, in bytes, on the stored
/// `(N + 1) × n` prediction matrix.
pub fn vus_opt_mem_with_budget(
    series: &ScoredSeries,
    grid: &ThresholdGrid,
    buffers: &BufferGrid,
    budget: usize,
) -> Result<VusResult> {
    let started = Instant::now();
    let n = series.len();
    let need = grid.len().saturating_mul(n);
    if need > budget {
        return Err(Error::Resource(format!(
            "prediction matrix needs {need} bytes ({} thresholds x {n} points), budget is {budget}; \
             use the opt implementation instead",
            grid.len()
        )));
    }
    let score = series.score();
    let mut matrix = vec![0u8; need];
    let mut sum_pred = Vec::with_capacity(grid.len());
    for (row, &th) in matrix.chunks_exact_mut(n).zip(grid.values()) {
        let mut count = 0usize;
        for (p, &s) in row.iter_mut().zip(score) {
            *p = u8::from(s >= th);
            count += usize::from(*p);
        }
        sum_pred.push(count);
    }
    let source = Predictions::Stored { matrix: &matrix, n };
    let per_buffer = dynamic_pass(series, grid, buffers, &sum_pred, &source);
    Ok(VusResult::from_per_buffer(
        per_buffer,
        VusImpl::OptMem,
        started.elapsed(),
        !series.has_both_classes(),
    ))
}

fn prediction_counts(score: &[f64], grid: &ThresholdGrid) -> Vec<usize> {
    grid.values()
        .iter()
        .map(|&th| score.iter().filter(|&&s| s >= th).count())
        .collect()
}

enum Predictions<'a> {
    Recompute { score: &'a [f64], grid: &'a [f64] },
    Stored { matrix: &'a [u8], n: usize },
}

impl Predictions<'_> {
    /// Prediction bits of threshold `k` over `seg`.
    #[inline]
    fn slice<'s>(&'s self, k: usize, seg: &AnomalyRange, scratch: &'s mut Vec<u8>) -> &'s [u8] {
        match self {
            Predictions::Recompute { score, grid } => {
                let th = grid[k];
                scratch.clear();
                scratch.extend(
                    score[seg.start..=seg.end]
                        .iter()
                        .map(|&s| u8::from(s >= th)),
                );
                scratch
            }
            Predictions::Stored { matrix, n } => {
                let row = k * n;
                &matrix[row + seg.start..=row + seg.end]
            }
        }
    }
}

/// A dynamic section with the labeled ranges it contains.
struct Section<'a> {
    span: AnomalyRange,
    labels: &'a [u8],
    ranges: Vec<AnomalyRange>,
}

fn sections(series: &ScoredSeries, max_buffer: usize) -> Vec<Section<'_>> {
    let labels = series.labels();
    let map = build_segment_map(labels, max_buffer);
    let ranges = extract_ranges(labels);
    let mut next = 0;
    map.dynamic
        .iter()
        .map(|span| {
            let first = next;
            while next < ranges.len() && ranges[next].start <= span.end {
                next += 1;
            }
            Section {
                span: *span,
                labels: &labels[span.start..=span.end],
                ranges: ranges[first..next].to_vec(),
            }
        })
        .collect()
}

fn dynamic_pass(
    series: &ScoredSeries,
    grid: &ThresholdGrid,
    buffers: &BufferGrid,
    sum_pred: &[usize],
    source: &Predictions<'_>,
) -> Vec<BufferAuc> {
    let n = series.len();
    let label_count = series.anomaly_count();
    let sections = sections(series, buffers.max());
    let widest = sections.iter().map(|s| s.span.len()).max().unwrap_or(0);
    let mut scratch = Vec::with_capacity(widest);
    let mut product = vec![0.0f64; widest];
    let mut per_buffer = Vec::with_capacity(buffers.len());

    for &buffer in buffers.lengths() {
        // label_ℓ and its support runs, per section in local coordinates
        let windows: Vec<Vec<f64>> = sections
            .iter()
            .map(|sec| {
                let mut w = vec![0.0; sec.span.len()];
                fill_buffered_labels(&sec.ranges, buffer, n, sec.span.start, &mut w);
                w
            })
            .collect();
        let seqs: Vec<Vec<AnomalyRange>> = windows
            .iter()
            .map(|w| extract_ranges(&w.iter().map(|&v| u8::from(v > 0.0)).collect::<Vec<_>>()))
            .collect();
        let seq_len: usize = seqs.iter().map(Vec::len).sum();
        let mut acc = CurveAccumulator::new(grid.len(), label_count, n);

        for (k, &count) in sum_pred.iter().enumerate() {
            let mut tp = 0.0;
            let mut sum_label = 0.0;
            let mut hit = 0usize;
            for ((sec, window), seq) in sections.iter().zip(&windows).zip(&seqs) {
                let pred = source.slice(k, &sec.span, &mut scratch);
                for i in 0..window.len() {
                    let lt = if sec.labels[i] == 1 {
                        1.0
                    } else if pred[i] == 1 {
                        window[i]
                    } else {
                        0.0
                    };
                    sum_label += lt;
                    let prod = lt * f64::from(pred[i]);
                    product[i] = prod;
                    tp += prod;
                }
                hit += seq
                    .iter()
                    .filter(|r| product[r.start..=r.end].iter().any(|&v| v > 0.0))
                    .count();
            }
            acc.push(tp, count, sum_label, hit, seq_len);
        }
        per_buffer.push(acc.finish(buffer));
    }
    per_buffer
}
