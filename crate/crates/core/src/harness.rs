//! Protocols for comparing measures rather than detectors: robustness to
//! perturbations, separability of accurate and inaccurate scores, and
//! consistency of the rankings a measure induces.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{evaluate, BufferChoice, EvalOptions, Measure};
use crate::model::ScoredSeries;
use crate::perturb::{
    perturb_lag, perturb_noise, PerturbationKind, PerturbationSpec, LAG_FRACTION, NOISE_FRACTION,
};

/// Stand-in for an infinite z value (zero variance, different means).
pub const Z_SENTINEL: f64 = 1e12;

/// One detector's score for a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method: String,
    pub score: Vec<f64>,
}

impl MethodScore {
    pub fn new(method: impl Into<String>, score: Vec<f64>) -> Self {
        Self {
            method: method.into(),
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCell {
    pub method: String,
    pub kind: PerturbationKind,
    pub measure: Measure,
    /// Measure value at each grid point.
    pub values: Vec<f64>,
    pub std: f64,
}

pub type KindTable = BTreeMap<PerturbationKind, BTreeMap<Measure, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub series_id: String,
    pub buffer: usize,
    pub cells: Vec<RobustnessCell>,
    /// Mean std over methods, per perturbation kind and measure.
    pub series_mean: KindTable,
}

/// Dataset and global means of per-series robustness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessSummary {
    pub per_dataset: BTreeMap<String, KindTable>,
    pub global: KindTable,
}

/// Population standard deviation. Values are shifted by the first one
/// before summing so identical values give exactly 0.
pub fn population_std(values: &[f64]) -> f64 {
    moments(values).1.sqrt()
}

/// Mean and population variance, computed on values shifted by the first.
fn moments(values: &[f64]) -> (f64, f64) {
    let Some(&origin) = values.first() else {
        return (0.0, 0.0);
    };
    let n = values.len() as f64;
    let shifted: Vec<f64> = values.iter().map(|v| v - origin).collect();
    let m = shifted.iter().sum::<f64>() / n;
    let var = shifted.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (origin + m, var)
}

/// Default plans for the requested kinds on one series.
pub fn default_specs(
    series: &ScoredSeries,
    buffer: usize,
    kinds: &[PerturbationKind],
    seed: u64,
) -> Vec<PerturbationSpec> {
    kinds
        .iter()
        .map(|&k| PerturbationSpec::default_for(k, series, buffer, seed))
        .collect()
}

/// Evaluate every method under every grid point of every plan and report
/// the standard deviation of each measure across each plan's grid.
///
/// The buffer length is resolved once on the unperturbed series so the
/// study measures the measures, not the period estimator.
pub fn robustness_study(
    series_id: &str,
    labels: &[u8],
    values: Option<&[f64]>,
    scores: &[MethodScore],
    specs: &[PerturbationSpec],
    opts: &EvalOptions,
) -> Result<RobustnessReport> {
    if scores.is_empty() {
        return Err(Error::usage("robustness study needs at least one score"));
    }
    let buffer = opts.buffer.resolve(values, labels);
    let opts = EvalOptions {
        buffer: BufferChoice::Fixed(buffer),
        ..opts.clone()
    };
    let series: Vec<ScoredSeries> = scores
        .iter()
        .map(|m| {
            if m.score.len() != labels.len() {
                return Err(Error::usage(format!(
                    "score `{}` has {} points, labels have {}",
                    m.method,
                    m.score.len(),
                    labels.len()
                )));
            }
            ScoredSeries::new(m.score.clone(), labels.to_vec())
        })
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize, usize)> = (0..scores.len())
        .flat_map(|m| {
            specs
                .iter()
                .enumerate()
                .flat_map(move |(s, spec)| (0..spec.grid.len()).map(move |g| (m, s, g)))
        })
        .collect();
    // collect keeps task order, so the reduction below is deterministic
    let evals = tasks
        .par_iter()
        .map(|&(m, s, g)| {
            let perturbed = specs[s].apply(&series[m], g)?;
            evaluate(&perturbed, None, &opts).map(|e| e.measures)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    let mut at = 0;
    for method in scores {
        for spec in specs {
            let block = &evals[at..at + spec.grid.len()];
            at += spec.grid.len();
            for &measure in &opts.measures {
                let values: Vec<f64> = block.iter().map(|e| e[&measure]).collect();
                cells.push(RobustnessCell {
                    method: method.method.clone(),
                    kind: spec.kind,
                    measure,
                    std: population_std(&values),
                    values,
                });
            }
        }
    }

    let mut sums: BTreeMap<(PerturbationKind, Measure), Vec<f64>> = BTreeMap::new();
    for c in &cells {
        sums.entry((c.kind, c.measure)).or_default().push(c.std);
    }
    let mut series_mean = KindTable::new();
    for ((kind, measure), stds) in sums {
        series_mean
            .entry(kind)
            .or_default()
            .insert(measure, mean(&stds));
    }
    Ok(RobustnessReport {
        series_id: series_id.to_string(),
        buffer,
        cells,
        series_mean,
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_tables<'a>(tables: impl Iterator<Item = &'a KindTable>) -> KindTable {
    let mut acc: BTreeMap<(PerturbationKind, Measure), Vec<f64>> = BTreeMap::new();
    for t in tables {
        for (&kind, row) in t {
            for (&measure, &v) in row {
                acc.entry((kind, measure)).or_default().push(v);
            }
        }
    }
    let mut out = KindTable::new();
    for ((kind, measure), v) in acc {
        out.entry(kind).or_default().insert(measure, mean(&v));
    }
    out
}

/// Average per-series reports within each dataset, then across datasets.
pub fn summarize(reports: &[(String, RobustnessReport)]) -> RobustnessSummary {
    let mut by_dataset: BTreeMap<String, Vec<&KindTable>> = BTreeMap::new();
    for (dataset, r) in reports {
        by_dataset
            .entry(dataset.clone())
            .or_default()
            .push(&r.series_mean);
    }
    let per_dataset: BTreeMap<String, KindTable> = by_dataset
        .into_iter()
        .map(|(d, tables)| (d, mean_tables(tables.into_iter())))
        .collect();
    let global = mean_tables(per_dataset.values());
    RobustnessSummary {
        per_dataset,
        global,
    }
}

/// Two-sample z statistic from summary statistics.
///
/// Zero standard error gives 0 for equal means and `±Z_SENTINEL`
/// otherwise; the result is also clamped to that sentinel.
pub fn z_statistic(
    mean_a: f64,
    var_a: f64,
    n_a: usize,
    mean_b: f64,
    var_b: f64,
    n_b: usize,
) -> f64 {
    let se = (var_a / n_a as f64 + var_b / n_b as f64).sqrt();
    let diff = mean_a - mean_b;
    if se == 0.0 {
        return if diff == 0.0 {
            0.0
        } else {
            Z_SENTINEL.copysign(diff)
        };
    }
    (diff / se).clamp(-Z_SENTINEL, Z_SENTINEL)
}

/// z test between two populations of measure values, with population
/// variances.
pub fn z_test(accurate: &[f64], inaccurate: &[f64]) -> Result<f64> {
    if accurate.is_empty() || inaccurate.is_empty() {
        return Err(Error::usage("z test needs two non-empty populations"));
    }
    let (ma, va) = moments(accurate);
    let (mb, vb) = moments(inaccurate);
    Ok(z_statistic(
        ma,
        va,
        accurate.len(),
        mb,
        vb,
        inaccurate.len(),
    ))
}

/// `reps` slightly modified copies of `score`: each draws a lag from
/// `[-ℓ/4, ℓ/4]` and a noise amplitude from `[-0.05, 0.05]` of the score's
/// range.
pub fn jitter(score: &[f64], buffer: usize, reps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let lag_bound = (LAG_FRACTION * buffer as f64).round() as i64;
    let lag_bound = lag_bound.min(score.len() as i64 - 1).max(0);
    let span = {
        let max = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = score.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    };
    (0..reps)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let lag = rng.gen_range(-lag_bound..=lag_bound);
            let amplitude = rng.gen_range(-NOISE_FRACTION..=NOISE_FRACTION) * span;
            let lagged = perturb_lag(score, lag)?;
            Ok(perturb_noise(&lagged, amplitude, rng.gen()))
        })
        .collect()
}

fn measure_population(
    labels: &[u8],
    scores: &[Vec<f64>],
    opts: &EvalOptions,
) -> Result<Vec<BTreeMap<Measure, f64>>> {
    scores
        .par_iter()
        .map(|s| {
            let series = ScoredSeries::new(s.clone(), labels.to_vec())?;
            evaluate(&series, None, opts).map(|e| e.measures)
        })
        .collect()
}

/// z value of one measure between two populations of scores on the same
/// labels.
pub fn separability_ztest(
    labels: &[u8],
    accurate: &[Vec<f64>],
    inaccurate: &[Vec<f64>],
    measure: Measure,
    opts: &EvalOptions,
) -> Result<f64> {
    let opts = EvalOptions {
        measures: vec![measure],
        ..opts.clone()
    };
    let a: Vec<f64> = measure_population(labels, accurate, &opts)?
        .iter()
        .map(|m| m[&measure])
        .collect();
    let b: Vec<f64> = measure_population(labels, inaccurate, &opts)?
        .iter()
        .map(|m| m[&measure])
        .collect();
    z_test(&a, &b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub buffer: usize,
    pub reps: usize,
    pub z: BTreeMap<Measure, f64>,
    pub accurate_mean: BTreeMap<Measure, f64>,
    pub inaccurate_mean: BTreeMap<Measure, f64>,
}

/// Jitter every accurate and inaccurate score `reps` times, pool each side
/// and z-test every requested measure.
pub fn separability_study(
    labels: &[u8],
    values: Option<&[f64]>,
    accurate: &[Vec<f64>],
    inaccurate: &[Vec<f64>],
    reps: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<SeparabilityReport> {
    if accurate.is_empty() || inaccurate.is_empty() || reps == 0 {
        return Err(Error::usage(
            "separability needs scores on both sides and reps > 0",
        ));
    }
    let buffer = opts.buffer.resolve(values, labels);
    let opts = EvalOptions {
        buffer: BufferChoice::Fixed(buffer),
        ..opts.clone()
    };
    let pool = |scores: &[Vec<f64>], stream: u64| -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for (i, s) in scores.iter().enumerate() {
            let offset = (stream << 32) ^ ((i as u64) << 16);
            out.extend(jitter(s, buffer, reps, seed.wrapping_add(offset))?);
        }
        Ok(out)
    };
    let a = measure_population(labels, &pool(accurate, 1)?, &opts)?;
    let b = measure_population(labels, &pool(inaccurate, 2)?, &opts)?;
    let column = |pop: &[BTreeMap<Measure, f64>], m: Measure| -> Vec<f64> {
        pop.iter().map(|e| e[&m]).collect()
    };
    let mut z = BTreeMap::new();
    let mut accurate_mean = BTreeMap::new();
    let mut inaccurate_mean = BTreeMap::new();
    for &m in &opts.measures {
        let (ca, cb) = (column(&a, m), column(&b, m));
        z.insert(m, z_test(&ca, &cb)?);
        accurate_mean.insert(m, mean(&ca));
        inaccurate_mean.insert(m, mean(&cb));
    }
    Ok(SeparabilityReport {
        buffer,
        reps,
        z,
        accurate_mean,
        inaccurate_mean,
    })
}

/// Shannon entropy, in bits, of the empirical distribution of `ranks`.
///
/// Rank classes with equal counts are summed as one term, so uniform ranks
/// over k values give exactly `log2(k)`.
pub fn rank_entropy(ranks: &[usize]) -> f64 {
    if ranks.is_empty() {
        return 0.0;
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in ranks {
        *counts.entry(r).or_default() += 1;
    }
    let mut by_count: BTreeMap<usize, usize> = BTreeMap::new();
    for c in counts.into_values() {
        *by_count.entry(c).or_default() += 1;
    }
    let total = ranks.len() as f64;
    by_count
        .into_iter()
        .map(|(c, m)| (m * c) as f64 / total * (total / c as f64).log2())
        .sum()
}

/// Competition ranks ("1224"), higher value ranking first.
pub fn competition_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|v| 1 + values.iter().filter(|&&o| o > *v).count())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub methods: Vec<String>,
    pub series: usize,
    /// Rank entropy per measure and method.
    pub entropy: BTreeMap<Measure, BTreeMap<String, f64>>,
    /// Mean over methods, per measure.
    pub mean_entropy: BTreeMap<Measure, f64>,
}

/// Rank the methods on every series under each measure and report the
/// entropy of each method's ranks across the dataset.
///
/// `table[i][method]` holds the measure values of one method on series `i`;
/// every series must carry the same methods.
pub fn consistency_study(
    table: &[BTreeMap<String, BTreeMap<Measure, f64>>],
    measures: &[Measure],
) -> Result<ConsistencyReport> {
    let first = table
        .first()
        .ok_or_else(|| Error::usage("consistency needs at least one series"))?;
    let methods: Vec<String> = first.keys().cloned().collect();
    if methods.len() < 2 {
        return Err(Error::usage("consistency needs at least two methods"));
    }
    for (i, row) in table.iter().enumerate() {
        if row.keys().ne(first.keys()) {
            return Err(Error::usage(format!(
                "series {i} does not carry the same methods as series 0"
            )));
        }
    }
    let mut entropy = BTreeMap::new();
    let mut mean_entropy = BTreeMap::new();
    for &m in measures {
        let mut ranks: Vec<Vec<usize>> = vec![Vec::with_capacity(table.len()); methods.len()];
        for row in table {
            let values: Vec<f64> = methods
                .iter()
                .map(|name| {
                    row[name]
                        .get(&m)
                        .copied()
                        .ok_or_else(|| Error::usage(format!("measure {m} missing for `{name}`")))
                })
                .collect::<Result<_>>()?;
            for (j, r) in competition_ranks(&values).into_iter().enumerate() {
                ranks[j].push(r);
            }
        }
        let per: BTreeMap<String, f64> = methods
            .iter()
            .zip(&ranks)
            .map(|(name, r)| (name.clone(), rank_entropy(r)))
            .collect();
        mean_entropy.insert(m, mean(&per.values().copied().collect::<Vec<_>>()));
        entropy.insert(m, per);
    }
    Ok(ConsistencyReport {
        methods,
        series: table.len(),
        entropy,
        mean_entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};

    #[test]
    fn z_examples() {
        assert_eq!(z_test(&[0.3, 0.4, 0.5], &[0.3, 0.4, 0.5]).unwrap(), 0.0);
        assert_eq!(z_test(&[1.0; 3], &[0.0; 3]).unwrap(), Z_SENTINEL);
        assert_eq!(z_test(&[0.0; 3], &[1.0; 3]).unwrap(), -Z_SENTINEL);
        assert_eq!(z_test(&[0.5; 3], &[0.5; 4]).unwrap(), 0.0);
        assert_eq!(z_test(&[0.1; 7], &[0.1; 3]).unwrap(), 0.0);
        let z = z_statistic(0.8, 0.01, 50, 0.5, 0.01, 50);
        assert!((z - 15.0).abs() < 1e-9, "{z}");
        assert!(z_test(&[], &[1.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(rank_entropy(&[1, 1, 1, 1]), 0.0);
        assert_eq!(rank_entropy(&[1, 2, 3, 4]), 2.0);
        assert_eq!(rank_entropy(&[1, 1, 2, 2]), 1.0);
        for k in 1..=12 {
            let ranks: Vec<usize> = (0..5 * k).map(|i| i % k + 1).collect();
            assert_eq!(rank_entropy(&ranks), (k as f64).log2(), "k = {k}");
        }
        // relabeling ranks does not change entropy
        assert_eq!(rank_entropy(&[1, 1, 3, 2]), rank_entropy(&[4, 4, 1, 2]));
        assert!(rank_entropy(&[1, 1, 1, 2]) < rank_entropy(&[1, 1, 2, 2]));
    }

    #[test]
    fn ranks_share_ties() {
        assert_eq!(competition_ranks(&[0.9, 0.5, 0.9, 0.1]), vec![1, 3, 1, 4]);
    }

    fn corpus() -> (ScoredSeries, Vec<MethodScore>) {
        let s = generate(&SynthSpec {
            n: 1_500,
            alpha: 4,
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        let flat = MethodScore::new("flat", s.score().iter().map(|v| v * 0.5).collect());
        let good = MethodScore::new("good", s.score().to_vec());
        (s, vec![good, flat])
    }

    fn small_opts(measures: Vec<Measure>) -> EvalOptions {
        EvalOptions {
            measures,
            thresholds: 20,
            buffer: BufferChoice::Fixed(8),
            ..Default::default()
        }
    }

    #[test]
    fn identity_plans_have_zero_std() {
        let (s, scores) = corpus();
        let specs: Vec<PerturbationSpec> = PerturbationKind::ALL
            .iter()
            .map(|&k| PerturbationSpec::identity(k, &s))
            .collect();
        let r = robustness_study(
            "s",
            s.labels(),
            None,
            &scores,
            &specs,
            &small_opts(Measure::ALL.to_vec()),
        )
        .unwrap();
        assert_eq!(r.cells.len(), 2 * 3 * 13);
        assert!(r.cells.iter().all(|c| c.std == 0.0 && c.values.len() == 10));
        assert!(r
            .series_mean
            .values()
            .flat_map(|m| m.values())
            .all(|&v| v == 0.0));
    }

    #[test]
    fn study_is_deterministic() {
        let (s, scores) = corpus();
        let specs = default_specs(&s, 8, &PerturbationKind::ALL, 3);
        let opts = small_opts(vec![Measure::F, Measure::VusRoc]);
        let a = robustness_study("s", s.labels(), None, &scores, &specs, &opts).unwrap();
        let b = robustness_study("s", s.labels(), None, &scores, &specs, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.cells.iter().any(|c| c.std > 0.0));
    }

    #[test]
    fn summary_means_are_hierarchical() {
        let (s, scores) = corpus();
        let specs = default_specs(&s, 8, &[PerturbationKind::Lag], 3);
        let opts = small_opts(vec![Measure::AucRoc]);
        let r = robustness_study("s", s.labels(), None, &scores, &specs, &opts).unwrap();
        let mut zero = r.clone();
        for v in zero.series_mean.values_mut().flat_map(|m| m.values_mut()) {
            *v = 0.0;
        }
        let v = r.series_mean[&PerturbationKind::Lag][&Measure::AucRoc];
        let summary = summarize(&[
            ("a".into(), r.clone()),
            ("a".into(), zero.clone()),
            ("b".into(), r.clone()),
        ]);
        let lag = |t: &KindTable| t[&PerturbationKind::Lag][&Measure::AucRoc];
        assert!((lag(&summary.per_dataset["a"]) - v / 2.0).abs() < 1e-15);
        assert_eq!(lag(&summary.per_dataset["b"]), v);
        assert!((lag(&summary.global) - 0.75 * v).abs() < 1e-15);
    }

    #[test]
    fn accurate_scores_separate_from_noise() {
        let (s, scores) = corpus();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise: Vec<f64> = (0..s.len()).map(|_| rng.gen()).collect();
        let r = separability_study(
            s.labels(),
            None,
            &[scores[0].score.clone()],
            &[noise],
            10,
            7,
            &small_opts(vec![Measure::AucRoc, Measure::VusRoc]),
        )
        .unwrap();
        assert!(r.z[&Measure::AucRoc] > 3.0);
        assert!(r.z[&Measure::VusRoc] > 3.0);
    }

    #[test]
    fn consistency_of_fixed_order() {
        let row = |a: f64, b: f64, c: f64| -> BTreeMap<String, BTreeMap<Measure, f64>> {
            [("a", a), ("b", b), ("c", c)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), BTreeMap::from([(Measure::F, v)])))
                .collect()
        };
        let table = vec![row(0.9, 0.5, 0.1), row(0.8, 0.6, 0.2), row(0.7, 0.1, 0.3)];
        let r = consistency_study(&table, &[Measure::F]).unwrap();
        assert_eq!(r.entropy[&Measure::F]["a"], 0.0);
        assert!(r.entropy[&Measure::F]["b"] > 0.0);
        let bad = vec![row(0.1, 0.2, 0.3), BTreeMap::new()];
        assert!(consistency_study(&bad, &[Measure::F]).is_err());
    }
}
