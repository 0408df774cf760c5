//! Wall-time sweeps over one synthetic-data parameter at a time, with a
//! least-squares fit of median time against the parameter.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::curves::{auc_pr, auc_roc, sweep_curve};
use crate::error::{Error, Result};
use crate::model::{ScoredSeries, ThresholdGrid};
use crate::range_auc::{r_auc_pr, r_auc_roc};
use crate::synth::{generate, SynthSpec};
use crate::vus::{vus, BufferGrid, VusImpl};

pub const DEFAULT_REPS: usize = 10;
/// Default largest buffer of the timing study.
pub const DEFAULT_MAX_BUFFER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "mean_len")]
    MeanLen,
    #[serde(rename = "std_len")]
    StdLen,
    /// Series length |T|.
    #[serde(rename = "n")]
    Length,
    /// Largest buffer length.
    #[serde(rename = "L")]
    MaxBuffer,
    /// Number of threshold intervals.
    #[serde(rename = "N")]
    Thresholds,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::MeanLen => "mean_len",
            SweepParam::StdLen => "std_len",
            SweepParam::Length => "n",
            SweepParam::MaxBuffer => "L",
            SweepParam::Thresholds => "N",
        }
    }

    /// Inclusive sweep bounds.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            SweepParam::Alpha => (0.0, 2e3),
            SweepParam::MeanLen => (0.0, 1e3),
            SweepParam::StdLen => (0.0, 10.0),
            SweepParam::Length => (1e3, 1e5),
            SweepParam::MaxBuffer => (0.0, 1e3),
            SweepParam::Thresholds => (2.0, 1e3),
        }
    }

    pub fn integral(self) -> bool {
        !matches!(self, SweepParam::MeanLen | SweepParam::StdLen)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "mean_len" | "mean-len" => Ok(SweepParam::MeanLen),
            "std_len" | "std-len" => Ok(SweepParam::StdLen),
            "n" | "length" => Ok(SweepParam::Length),
            "L" => Ok(SweepParam::MaxBuffer),
            "N" => Ok(SweepParam::Thresholds),
            other => Err(Error::usage(format!(
                "unknown sweep parameter `{other}` (alpha, mean_len, std_len, n, L, N)"
            ))),
        }
    }
}

/// A timed computation: one VUS implementation or a single-curve baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TimedImpl {
    Vus(VusImpl),
    /// Range-AUC at the largest buffer only.
    RangeAuc,
    /// Plain AUC-ROC and AUC-PR.
    Auc,
}

impl TimedImpl {
    pub const ALL: [TimedImpl; 5] = [
        TimedImpl::Vus(VusImpl::Naive),
        TimedImpl::Vus(VusImpl::Opt),
        TimedImpl::Vus(VusImpl::OptMem),
        TimedImpl::RangeAuc,
        TimedImpl::Auc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TimedImpl::Vus(v) => v.name(),
            TimedImpl::RangeAuc => "r-auc",
            TimedImpl::Auc => "auc",
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<TimedImpl>> {
        let out: Vec<TimedImpl> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(Error::usage("empty implementation list"));
        }
        Ok(out)
    }
}

impl fmt::Display for TimedImpl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<TimedImpl> for String {
    fn from(t: TimedImpl) -> String {
        t.name().to_string()
    }
}

impl TryFrom<String> for TimedImpl {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for TimedImpl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r-auc" | "r_auc" => Ok(TimedImpl::RangeAuc),
            "auc" => Ok(TimedImpl::Auc),
            other => other.parse().map(TimedImpl::Vus),
        }
    }
}

/// Everything held fixed while one parameter is swept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub spec: SynthSpec,
    pub max_buffer: usize,
    pub thresholds: usize,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            spec: SynthSpec::default(),
            max_buffer: DEFAULT_MAX_BUFFER,
            thresholds: ThresholdGrid::DEFAULT_INTERVALS,
        }
    }
}

impl TimingConfig {
    /// This configuration with `param` set to `value`.
    pub fn with(&self, param: SweepParam, value: f64) -> Result<Self> {
        let (lo, hi) = param.bounds();
        if !(lo..=hi).contains(&value) {
            return Err(Error::usage(format!(
                "{param} = {value} outside its sweep bounds [{lo}, {hi}]"
            )));
        }
        if param.integral() && value.fract() != 0.0 {
            return Err(Error::usage(format!(
                "{param} must be an integer, got {value}"
            )));
        }
        let mut c = *self;
        match param {
            SweepParam::Alpha => c.spec.alpha = value as usize,
            SweepParam::MeanLen => c.spec.mean_len = value,
            SweepParam::StdLen => c.spec.std_len = value,
            SweepParam::Length => c.spec.n = value as usize,
            SweepParam::MaxBuffer => c.max_buffer = value as usize,
            SweepParam::Thresholds => c.thresholds = value as usize,
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub value: f64,
    pub implementation: TimedImpl,
    pub rep: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub value: f64,
    pub implementation: TimedImpl,
    pub median: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub param: SweepParam,
    pub config: TimingConfig,
    pub reps: usize,
    pub rows: Vec<TimingRow>,
    pub summary: Vec<TimingSummary>,
}

impl BenchResult {
    /// `(value, median)` pairs of one implementation, in sweep order.
    pub fn medians(&self, which: TimedImpl) -> Vec<(f64, f64)> {
        self.summary
            .iter()
            .filter(|s| s.implementation == which)
            .map(|s| (s.value, s.median))
            .collect()
    }
}

/// Time one run of `which` on a prepared series.
pub fn time_once(
    which: TimedImpl,
    series: &ScoredSeries,
    grid: &ThresholdGrid,
    buffers: &BufferGrid,
) -> Result<Duration> {
    let start = Instant::now();
    match which {
        TimedImpl::Vus(v) => {
            std::hint::black_box(vus(series, grid, buffers, v)?);
        }
        TimedImpl::RangeAuc => {
            let b = buffers.max();
            std::hint::black_box((r_auc_roc(series, grid, b), r_auc_pr(series, grid, b)));
        }
        TimedImpl::Auc => {
            let c = sweep_curve(series, grid);
            std::hint::black_box((auc_roc(&c), auc_pr(&c)));
        }
    }
    Ok(start.elapsed())
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        s[k / 2]
    } else {
        (s[k / 2 - 1] + s[k / 2]) / 2.0
    }
}

/// One-factor-at-a-time timing sweep.
///
/// Runs serially on the calling thread. For every parameter value and
/// implementation one warm-up run is discarded, then `reps` runs are timed.
pub fn run_timing_sweep(
    param: SweepParam,
    values: &[f64],
    impls: &[TimedImpl],
    reps: usize,
    base: &TimingConfig,
) -> Result<BenchResult> {
    if values.is_empty() || impls.is_empty() || reps == 0 {
        return Err(Error::usage(
            "timing sweep needs values, implementations and reps > 0",
        ));
    }
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &value in values {
        let config = base.with(param, value)?;
        let series = generate(&config.spec)?;
        let grid = ThresholdGrid::uniform(config.thresholds)?;
        let buffers = BufferGrid::up_to(config.max_buffer);
        for &which in impls {
            time_once(which, &series, &grid, &buffers)?;
            let mut times = Vec::with_capacity(reps);
            for rep in 0..reps {
                let t = time_once(which, &series, &grid, &buffers)?.as_secs_f64();
                times.push(t);
                rows.push(TimingRow {
                    value,
                    implementation: which,
                    rep,
                    seconds: t,
                });
            }
            summary.push(TimingSummary {
                value,
                implementation: which,
                median: median(&times),
                mean: times.iter().sum::<f64>() / reps as f64,
            });
        }
    }
    Ok(BenchResult {
        param,
        config: *base,
        reps,
        rows,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Set when y is constant and R² is undefined (reported as 0).
    pub degenerate: bool,
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::usage("x and y differ in length"));
    }
    let mut distinct = x.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::usage(format!(
            "a fit needs at least 3 distinct parameter values, got {}",
            distinct.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if syy == 0.0 {
        return Ok(LineFit {
            slope: 0.0,
            intercept: my,
            r2: 0.0,
            degenerate: true,
        });
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r2: (sxy * sxy) / (sxx * syy),
        degenerate: false,
    })
}

/// Fit median time against the swept parameter, per implementation.
pub fn fit_slopes(result: &BenchResult) -> Result<BTreeMap<TimedImpl, LineFit>> {
    let mut impls: Vec<TimedImpl> = result.summary.iter().map(|s| s.implementation).collect();
    impls.sort();
    impls.dedup();
    impls
        .into_iter()
        .map(|which| {
            let (x, y): (Vec<f64>, Vec<f64>) = result.medians(which).into_iter().unzip();
            fit_line(&x, &y).map(|f| (which, f))
        })
        .collect()
}
