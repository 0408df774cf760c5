//! Shared fixtures for the criterion benchmarks.

use vus_core::synth::{generate, SynthSpec};
use vus_core::ScoredSeries;

/// Normalized synthetic series of length `n` with ten anomalies of length ten.
pub fn series(n: usize) -> ScoredSeries {
    generate(&SynthSpec {
        n,
        ..SynthSpec::default()
    })
    .expect("valid synthetic spec")
    .normalized()
}
