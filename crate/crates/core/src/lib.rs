//! Accuracy measures for time-series anomaly detection.
//!
//! Point-wise threshold measures, range-based precision and recall,
//! AUC-ROC/PR, range-AUC with buffered labels, and the volume under the
//! range-AUC surface (VUS) with two optimized implementations that match
//! the reference one bit for bit. The crate also carries the robustness,
//! separability and consistency protocols used to compare measures, a
//! synthetic series generator and a wall-time benchmark harness.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod harness;
pub mod io;
pub mod measures;
pub mod model;
pub mod perturb;
pub mod point;
pub mod range_auc;
pub mod range_f;
pub mod synth;
pub mod timing;
pub mod vus;

pub use error::{Error, Result};
pub use measures::{evaluate, BufferChoice, EvalOptions, Evaluation, Measure};
pub use model::{AnomalyRange, PredictionMask, ScoredSeries, ThresholdGrid};
pub use vus::{Aggregation, BufferGrid, VusImpl, VusResult};
