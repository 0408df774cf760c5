//! Volume under the range-ROC and range-PR surfaces, swept over buffer
//! lengths.
//!
//! Three implementations produce bit-identical values:
//!
//! * [`vus_naive`] rebuilds labels, predictions and sums over the whole
//!   series for every `(buffer, threshold)` pair.
//! * [`vus_opt`] splits the series into static and dynamic sections. Only
//!   the dynamic sections (labeled ranges inflated by half the largest
//!   buffer) are revisited per pair; prediction counts over the whole
//!   series are computed once per threshold.
//! * [`vus_opt_mem`] additionally stores every threshold's prediction mask
//!   once and slices it in the dynamic pass.
//!
//! All three accumulate every floating-point sum in increasing index order
//! and skip only exact zeros, which is why they agree to the last bit.

mod naive;
mod opt;
mod segments;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::curves::{average_precision, roc_area};
use crate::error::{Error, Result};
use crate::model::{ScoredSeries, ThresholdGrid};
use crate::range_auc::{confusion_from_sums, rates_from_confusion};

pub use naive::vus_naive;
pub use opt::{vus_opt, vus_opt_mem, vus_opt_mem_with_budget};
pub use segments::{build_segment_map, SegmentMap};

/// Default cap on the prediction matrix stored by [`vus_opt_mem`].
pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

/// Buffer lengths `0 = ℓ_0 < ℓ_1 < ... < ℓ_L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferGrid {
    lengths: Vec<usize>,
}

impl BufferGrid {
    /// Every integer length in `0..=max`.
    pub fn up_to(max: usize) -> Self {
        Self {
            lengths: (0..=max).collect(),
        }
    }

    pub fn from_lengths(lengths: Vec<usize>) -> Result<Self> {
        if lengths.first() != Some(&0) {
            return Err(Error::usage("buffer grid must start at 0"));
        }
        if lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::usage("buffer lengths must be strictly increasing"));
        }
        Ok(Self { lengths })
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn max(&self) -> usize {
        *self.lengths.last().expect("non-empty grid")
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum VusImpl {
    Naive,
    Opt,
    #[default]
    OptMem,
}

impl VusImpl {
    pub const ALL: [VusImpl; 3] = [VusImpl::Naive, VusImpl::Opt, VusImpl::OptMem];

    pub fn name(self) -> &'static str {
        match self {
            VusImpl::Naive => "naive",
            VusImpl::Opt => "opt",
            VusImpl::OptMem => "opt-mem",
        }
    }
}

impl std::str::FromStr for VusImpl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(VusImpl::Naive),
            "opt" => Ok(VusImpl::Opt),
            "opt-mem" | "opt_mem" => Ok(VusImpl::OptMem),
            other => Err(Error::usage(format!(
                "unknown VUS implementation `{other}`"
            ))),
        }
    }
}

/// How per-buffer areas are combined into one volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Arithmetic mean over buffer lengths.
    #[default]
    Mean,
    /// Trapezoid over buffer lengths, normalized by the total buffer span.
    Trapezoid,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Trapezoid => "trapezoid",
        }
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "trapezoid" => Ok(Aggregation::Trapezoid),
            other => Err(Error::usage(format!("unknown aggregation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferAuc {
    pub buffer: usize,
    pub auc_roc: f64,
    pub auc_pr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VusResult {
    pub vus_roc: f64,
    pub vus_pr: f64,
    pub per_buffer: Vec<BufferAuc>,
    pub impl_tag: VusImpl,
    pub wall_time: Duration,
    /// Set when the labels hold a single class and the areas are
    /// conventional rather than meaningful.
    pub degenerate: bool,
}

impl VusResult {
    fn from_per_buffer(
        per_buffer: Vec<BufferAuc>,
        impl_tag: VusImpl,
        wall_time: Duration,
        degenerate: bool,
    ) -> Self {
        let (vus_roc, vus_pr) = mean_aggregate(&per_buffer);
        Self {
            vus_roc,
            vus_pr,
            per_buffer,
            impl_tag,
            wall_time,
            degenerate,
        }
    }

    /// `(vus_roc, vus_pr)` under the requested aggregation.
    pub fn aggregate(&self, mode: Aggregation) -> (f64, f64) {
        match mode {
            Aggregation::Mean => (self.vus_roc, self.vus_pr),
            Aggregation::Trapezoid => vus_trapezoid_aggregate(&self.per_buffer),
        }
    }

    /// Same values, ignoring implementation tag and timing.
    pub fn same_values(&self, other: &VusResult) -> bool {
        self.vus_roc.to_bits() == other.vus_roc.to_bits()
            && self.vus_pr.to_bits() == other.vus_pr.to_bits()
            && self.per_buffer == other.per_buffer
    }
}

fn mean_aggregate(per_buffer: &[BufferAuc]) -> (f64, f64) {
    let k = per_buffer.len() as f64;
    let roc: f64 = per_buffer.iter().map(|b| b.auc_roc).sum();
    let pr: f64 = per_buffer.iter().map(|b| b.auc_pr).sum();
    (roc / k, pr / k)
}

/// Trapezoidal integration of the per-buffer areas over buffer length,
/// divided by the buffer span. A single buffer returns its own areas.
pub fn vus_trapezoid_aggregate(per_buffer: &[BufferAuc]) -> (f64, f64) {
    match per_buffer {
        [] => (0.0, 0.0),
        [only] => (only.auc_roc, only.auc_pr),
        [first, .., last] => {
            let span = (last.buffer - first.buffer) as f64;
            let (mut roc, mut pr) = (0.0, 0.0);
            for w in per_buffer.windows(2) {
                let width = w[1].buffer.abs_diff(w[0].buffer) as f64;
                roc += (w[0].auc_roc + w[1].auc_roc) / 2.0 * width;
                pr += (w[0].auc_pr + w[1].auc_pr) / 2.0 * width;
            }
            (roc / span, pr / span)
        }
    }
}

pub fn vus(
    series: &ScoredSeries,
    grid: &ThresholdGrid,
    buffers: &BufferGrid,
    which: VusImpl,
) -> Result<VusResult> {
    match which {
        VusImpl::Naive => Ok(vus_naive(series, grid, buffers)),
        VusImpl::Opt => Ok(vus_opt(series, grid, buffers)),
        VusImpl::OptMem => vus_opt_mem(series, grid, buffers),
    }
}

/// Per-threshold rate lists for one buffer length.
struct CurveAccumulator {
    tpr: Vec<f64>,
    fpr: Vec<f64>,
    precision: Vec<f64>,
    label_count: usize,
    n: usize,
}

impl CurveAccumulator {
    fn new(capacity: usize, label_count: usize, n: usize) -> Self {
        Self {
            tpr: Vec::with_capacity(capacity),
            fpr: Vec::with_capacity(capacity),
            precision: Vec::with_capacity(capacity),
            label_count,
            n,
        }
    }

    #[inline]
    fn push(&mut self, tp: f64, sum_pred: usize, sum_label: f64, hit: usize, seq_len: usize) {
        let bc = confusion_from_sums(tp, sum_pred, sum_label, self.label_count, self.n);
        let existence = if seq_len == 0 {
            0.0
        } else {
            hit as f64 / seq_len as f64
        };
        let r = rates_from_confusion(&bc, existence);
        self.tpr.push(r.tpr);
        self.fpr.push(r.fpr);
        self.precision.push(r.precision);
    }

    fn finish(self, buffer: usize) -> BufferAuc {
        // no negatives: ROC undefined, reported as 0
        let auc_roc = if self.label_count == self.n {
            0.0
        } else {
            roc_area(&self.tpr, &self.fpr)
        };
        BufferAuc {
            buffer,
            auc_roc,
            auc_pr: average_precision(&self.tpr, &self.precision),
        }
    }
}
