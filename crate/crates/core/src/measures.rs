//! The thirteen scalar measures behind one entry point.
//!
//! [`evaluate`] is what the command-line tool and any language bindings
//! call: it normalizes the score, resolves the buffer length, runs only the
//! computations the requested measures need and returns a flat
//! name → value map.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::curves::{auc_pr, auc_roc, sweep_curve};
use crate::error::{Error, Result};
use crate::model::{
    apply_threshold, default_threshold, extract_ranges, ScoredSeries, ThresholdGrid,
};
use crate::point::{confusion, f_beta, precision_at_k};
use crate::range_auc::{default_buffer, range_areas, range_curve};
use crate::range_f::{r_precision, r_recall, rf_score, RangeRewardConfig};
use crate::vus::{vus, Aggregation, BufferGrid, VusImpl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Precision,
    Recall,
    F,
    PrecisionAtK,
    RPrecision,
    RRecall,
    RF,
    AucRoc,
    AucPr,
    RAucRoc,
    RAucPr,
    VusRoc,
    VusPr,
}

impl Measure {
    pub const ALL: [Measure; 13] = [
        Measure::Precision,
        Measure::Recall,
        Measure::F,
        Measure::PrecisionAtK,
        Measure::RPrecision,
        Measure::RRecall,
        Measure::RF,
        Measure::AucRoc,
        Measure::AucPr,
        Measure::RAucRoc,
        Measure::RAucPr,
        Measure::VusRoc,
        Measure::VusPr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Precision => "precision",
            Measure::Recall => "recall",
            Measure::F => "f",
            Measure::PrecisionAtK => "precision_at_k",
            Measure::RPrecision => "rprecision",
            Measure::RRecall => "rrecall",
            Measure::RF => "rf",
            Measure::AucRoc => "auc_roc",
            Measure::AucPr => "auc_pr",
            Measure::RAucRoc => "r_auc_roc",
            Measure::RAucPr => "r_auc_pr",
            Measure::VusRoc => "vus_roc",
            Measure::VusPr => "vus_pr",
        }
    }

    /// Parse a comma-separated list; `all` expands to every measure.
    pub fn parse_list(list: &str) -> Result<Vec<Measure>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item == "all" {
                out.extend(Measure::ALL);
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::usage("empty measure list"));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn needs_threshold(self) -> bool {
        matches!(
            self,
            Measure::Precision
                | Measure::Recall
                | Measure::F
                | Measure::RPrecision
                | Measure::RRecall
                | Measure::RF
        )
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == normalized)
            .ok_or_else(|| Error::usage(format!("unknown measure `{s}`")))
    }
}

/// Buffer length ℓ: fixed, or estimated from the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BufferChoice {
    #[default]
    Auto,
    Fixed(usize),
}

impl BufferChoice {
    pub fn resolve(self, values: Option<&[f64]>, labels: &[u8]) -> usize {
        match self {
            BufferChoice::Fixed(b) => b,
            BufferChoice::Auto => default_buffer(values, labels),
        }
    }
}

impl FromStr for BufferChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(BufferChoice::Auto);
        }
        s.parse().map(BufferChoice::Fixed).map_err(|_| {
            Error::usage(format!(
                "buffer must be `auto` or a non-negative integer, got `{s}`"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub measures: Vec<Measure>,
    /// Number of threshold intervals N; the grid has N + 1 values.
    pub thresholds: usize,
    pub buffer: BufferChoice,
    /// Largest buffer of the VUS sweep; `None` means twice ℓ.
    pub max_buffer: Option<usize>,
    pub vus_impl: VusImpl,
    pub aggregation: Aggregation,
    /// Threshold for the point and range F measures; `None` means the
    /// three-sigma rule on the normalized score.
    pub threshold: Option<f64>,
    /// `None` means the number of anomalous points.
    pub k: Option<usize>,
    pub beta: f64,
    pub range: RangeRewardConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            measures: Measure::ALL.to_vec(),
            thresholds: ThresholdGrid::DEFAULT_INTERVALS,
            buffer: BufferChoice::Auto,
            max_buffer: None,
            vus_impl: VusImpl::default(),
            aggregation: Aggregation::default(),
            threshold: None,
            k: None,
            beta: 1.0,
            range: RangeRewardConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: usize,
    pub anomaly_count: usize,
    pub thresholds: usize,
    pub buffer: usize,
    pub max_buffer: usize,
    pub aggregation: Aggregation,
    pub measures: BTreeMap<Measure, f64>,
    pub vus_impl: VusImpl,
    /// Wall time of the VUS computation alone; 0 when no VUS measure ran.
    pub vus_seconds: f64,
    pub seconds: f64,
    /// Labels hold a single class; AUC-type values are conventional.
    pub degenerate: bool,
}

impl Evaluation {
    pub fn get(&self, m: Measure) -> Option<f64> {
        self.measures.get(&m).copied()
    }
}

/// Compute the requested measures on `series`.
///
/// `values` is the raw time series, used only to estimate the period when
/// the buffer is [`BufferChoice::Auto`].
pub fn evaluate(
    series: &ScoredSeries,
    values: Option<&[f64]>,
    opts: &EvalOptions,
) -> Result<Evaluation> {
    if let Some(v) = values {
        if v.len() != series.len() {
            return Err(Error::usage(format!(
                "value channel has {} points, series has {}",
                v.len(),
                series.len()
            )));
        }
    }
    if opts.measures.is_empty() {
        return Err(Error::usage("no measures requested"));
    }
    let start = Instant::now();
    let s = series.normalized();
    let grid = ThresholdGrid::uniform(opts.thresholds)?;
    let buffer = opts.buffer.resolve(values, s.labels());
    let max_buffer = opts.max_buffer.unwrap_or(2 * buffer);
    let wants = |m: Measure| opts.measures.contains(&m);
    let mut out = BTreeMap::new();

    if opts.measures.iter().any(|m| m.needs_threshold()) {
        let th = match opts.threshold {
            Some(t) if t.is_finite() => t,
            Some(t) => return Err(Error::usage(format!("threshold must be finite, got {t}"))),
            None => default_threshold(s.score()),
        };
        let pred = apply_threshold(s.score(), th);
        let c = confusion(s.labels(), &pred)?;
        let real = extract_ranges(s.labels());
        let predicted = pred.ranges();
        for m in opts
            .measures
            .iter()
            .copied()
            .filter(|m| m.needs_threshold())
        {
            let v = match m {
                Measure::Precision => c.precision(),
                Measure::Recall => c.recall(),
                Measure::F => f_beta(&c, opts.beta)?,
                Measure::RPrecision => r_precision(&real, &predicted, &opts.range)?,
                Measure::RRecall => r_recall(&real, &predicted, &opts.range)?,
                Measure::RF => rf_score(&real, &predicted, &opts.range, opts.beta)?,
                _ => unreachable!("filtered to thresholded measures"),
            };
            out.insert(m, v);
        }
    }

    if wants(Measure::PrecisionAtK) {
        let k = opts.k.unwrap_or(s.anomaly_count());
        let v = if k == 0 && opts.k.is_none() {
            0.0
        } else {
            precision_at_k(s.score(), s.labels(), k)?
        };
        out.insert(Measure::PrecisionAtK, v);
    }

    let degenerate = !s.has_both_classes();
    if wants(Measure::AucRoc) || wants(Measure::AucPr) {
        let curve = sweep_curve(&s, &grid);
        // a single-class series has no meaningful ROC
        out.insert(
            Measure::AucRoc,
            if degenerate { 0.0 } else { auc_roc(&curve) },
        );
        out.insert(Measure::AucPr, auc_pr(&curve));
    }
    if wants(Measure::RAucRoc) || wants(Measure::RAucPr) {
        let (roc, pr) = range_areas(&range_curve(&s, &grid, buffer));
        out.insert(Measure::RAucRoc, if degenerate { 0.0 } else { roc });
        out.insert(Measure::RAucPr, pr);
    }
    let mut vus_seconds = 0.0;
    if wants(Measure::VusRoc) || wants(Measure::VusPr) {
        let r = vus(&s, &grid, &BufferGrid::up_to(max_buffer), opts.vus_impl)?;
        let (roc, pr) = r.aggregate(opts.aggregation);
        out.insert(Measure::VusRoc, roc);
        out.insert(Measure::VusPr, pr);
        vus_seconds = r.wall_time.as_secs_f64();
    }
    out.retain(|m, _| wants(*m));

    Ok(Evaluation {
        n: s.len(),
        anomaly_count: s.anomaly_count(),
        thresholds: opts.thresholds,
        buffer,
        max_buffer,
        aggregation: opts.aggregation,
        measures: out,
        vus_impl: opts.vus_impl,
        vus_seconds,
        seconds: start.elapsed().as_secs_f64(),
        degenerate,
    })
}

/// Convenience wrapper returning a single measure.
pub fn measure(
    series: &ScoredSeries,
    values: Option<&[f64]>,
    m: Measure,
    opts: &EvalOptions,
) -> Result<f64> {
    let opts = EvalOptions {
        measures: vec![m],
        ..opts.clone()
    };
    Ok(evaluate(series, values, &opts)?.measures[&m])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect() -> ScoredSeries {
        let mut labels = vec![0u8; 300];
        labels[50..70].fill(1);
        labels[200..205].fill(1);
        let score = labels.iter().map(|&l| f64::from(l)).collect();
        ScoredSeries::new(score, labels).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert_eq!("VUS-ROC".parse::<Measure>().unwrap(), Measure::VusRoc);
        assert!("auc".parse::<Measure>().is_err());
        assert_eq!(Measure::parse_list("all").unwrap().len(), 13);
        assert_eq!(
            Measure::parse_list("vus_pr, f,vus_pr").unwrap(),
            vec![Measure::F, Measure::VusPr]
        );
    }

    #[test]
    fn perfect_score_is_one_everywhere() {
        let e = evaluate(&perfect(), None, &EvalOptions::default()).unwrap();
        assert_eq!(e.measures.len(), 13);
        for (m, v) in &e.measures {
            assert!((v - 1.0).abs() <= 1e-9, "{m} = {v}");
        }
        // mean anomaly length of 20 and 5 with no value channel
        assert_eq!(e.buffer, 13);
        assert_eq!(e.max_buffer, 26);
    }

    #[test]
    fn subset_only_reports_requested() {
        let opts = EvalOptions {
            measures: vec![Measure::AucRoc],
            ..Default::default()
        };
        let e = evaluate(&perfect(), None, &opts).unwrap();
        assert_eq!(
            e.measures.keys().copied().collect::<Vec<_>>(),
            vec![Measure::AucRoc]
        );
        assert_eq!(e.vus_seconds, 0.0);
    }

    #[test]
    fn implementations_give_identical_maps() {
        let s = crate::synth::generate(&crate::synth::SynthSpec {
            n: 3_000,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        let run = |i| {
            evaluate(
                &s,
                None,
                &EvalOptions {
                    vus_impl: i,
                    buffer: BufferChoice::Fixed(12),
                    ..Default::default()
                },
            )
            .unwrap()
            .measures
        };
        let naive = run(VusImpl::Naive);
        assert_eq!(naive, run(VusImpl::Opt));
        assert_eq!(naive, run(VusImpl::OptMem));
    }

    #[test]
    fn no_anomalies_flagged() {
        let s = ScoredSeries::new((0..50).map(f64::from).collect(), vec![0; 50]).unwrap();
        let e = evaluate(&s, None, &EvalOptions::default()).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.get(Measure::AucRoc), Some(0.0));
        assert_eq!(e.get(Measure::PrecisionAtK), Some(0.0));
    }

    #[test]
    fn mismatched_value_channel_rejected() {
        let err = evaluate(&perfect(), Some(&[1.0, 2.0]), &EvalOptions::default()).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }

    #[test]
    fn buffer_choice_parses() {
        assert_eq!("auto".parse::<BufferChoice>().unwrap(), BufferChoice::Auto);
        assert_eq!("7".parse::<BufferChoice>().unwrap(), BufferChoice::Fixed(7));
        assert!("-1".parse::<BufferChoice>().is_err());
    }
}
