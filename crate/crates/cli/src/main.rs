//! `vus` command-line tool.
//!
//! Errors are printed as a single `error[<kind>]: <message>` line on stderr
//! and map to distinct exit codes (see [`exit_code`]).

mod args;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use vus_core::harness::{
    consistency_study, default_specs, robustness_study, separability_study, MethodScore,
};
use vus_core::io::{
    align_score, evaluation_to_csv, evaluation_to_json, load_score, load_series, round_sig,
    to_json, write_score, write_series, DatasetRecord, JSON_DIGITS,
};
use vus_core::perturb::PerturbationKind;
use vus_core::synth::{generate_full, SynthSpec};
use vus_core::timing::{fit_slopes, run_timing_sweep, SweepParam, TimedImpl, TimingConfig};
use vus_core::{evaluate, Aggregation, BufferChoice, Error, EvalOptions, Measure, Result, VusImpl};

use args::{BenchArgs, Cli, Command, MeasureArgs, OutFormat};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "VUS_THREADS";

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        "usage" => 2,
        "data" => 3,
        "resource" => 4,
        _ => 5,
    }
}

fn fail(e: &Error) -> ExitCode {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error[{}]: {msg}", e.kind());
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let msg: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            let msg = msg.join(" ");
            return fail(&Error::Usage(msg.trim_start_matches("error: ").to_string()));
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Usage(format!("{THREADS_ENV}: {e}")))
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Eval(a) => {
            let record = load_series(&a.series)?;
            let series = paired(&record, &a.score)?;
            let opts = eval_options(&a.measure)?;
            let e = evaluate(&series, Some(&record.values), &opts)?;
            match a.out {
                OutFormat::Json => evaluation_to_json(&record.series_id, &e),
                OutFormat::Csv => Ok(evaluation_to_csv(&record.series_id, &e)),
            }
        }
        Command::Robustness(a) => {
            let record = load_series(&a.series)?;
            let scores = method_scores(&a.scores, record.len())?;
            let opts = eval_options(&a.measure)?;
            let kinds: Vec<PerturbationKind> = if a.kind == "all" {
                PerturbationKind::ALL.to_vec()
            } else {
                vec![a.kind.parse()?]
            };
            let buffer = opts.buffer.resolve(Some(&record.values), &record.labels);
            let reference = record.with_score(scores[0].score.clone())?;
            let specs = default_specs(&reference, buffer, &kinds, a.seed);
            let opts = EvalOptions {
                buffer: BufferChoice::Fixed(buffer),
                ..opts
            };
            let report = robustness_study(
                &record.series_id,
                &record.labels,
                Some(&record.values),
                &scores,
                &specs,
                &opts,
            )?;
            to_json(&json!({ "seed": a.seed, "specs": specs, "report": report }))
        }
        Command::Separability(a) => {
            let record = load_series(&a.series)?;
            let accurate = plain_scores(&a.accurate, record.len())?;
            let inaccurate = plain_scores(&a.inaccurate, record.len())?;
            let opts = eval_options(&a.measure)?;
            let report = separability_study(
                &record.labels,
                Some(&record.values),
                &accurate,
                &inaccurate,
                a.reps,
                a.seed,
                &opts,
            )?;
            to_json(&json!({
                "series_id": record.series_id,
                "seed": a.seed,
                "report": report,
            }))
        }
        Command::Consistency(a) => {
            let opts = eval_options(&a.measure)?;
            let mut table = Vec::new();
            let series_files = files_with_extension(&a.dataset, "csv")?;
            for path in &series_files {
                let record = load_series(path)?;
                let scores = method_scores(&a.scores.join(&record.series_id), record.len())?;
                let mut row = BTreeMap::new();
                for m in scores {
                    let s = record.with_score(m.score)?;
                    row.insert(
                        m.method,
                        evaluate(&s, Some(&record.values), &opts)?.measures,
                    );
                }
                table.push(row);
            }
            let report = consistency_study(&table, &opts.measures)?;
            to_json(&report)
        }
        Command::Bench(a) => bench(a),
        Command::Synth(a) => {
            let spec = SynthSpec {
                alpha: a.alpha,
                mean_len: a.mean_len,
                std_len: a.std_len,
                n: a.length,
                period: a.period,
                seed: a.seed,
                ..SynthSpec::default()
            };
            let s = generate_full(&spec)?;
            write_series(&a.out, &s.values, s.series.labels())?;
            if let Some(p) = &a.score_out {
                write_score(p, s.series.score())?;
            }
            to_json(&json!({
                "series": a.out,
                "n": s.series.len(),
                "anomaly_count": s.series.anomaly_count(),
                "spec": spec,
            }))
        }
    }
}

fn eval_options(a: &MeasureArgs) -> Result<EvalOptions> {
    Ok(EvalOptions {
        measures: Measure::parse_list(&a.measures)?,
        thresholds: a.thresholds,
        buffer: a.buffer.parse()?,
        max_buffer: a.max_buffer,
        vus_impl: a.implementation.parse::<VusImpl>()?,
        aggregation: a.aggregation.parse::<Aggregation>()?,
        threshold: a.threshold,
        k: a.k,
        ..EvalOptions::default()
    })
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn paired(record: &DatasetRecord, score_path: &Path) -> Result<vus_core::ScoredSeries> {
    let (score, warning) = align_score(load_score(score_path)?, record.len())
        .map_err(|e| Error::InvalidData(format!("{}: {e}", score_path.display())))?;
    if let Some(w) = warning {
        warn(&format!("{}: {w}", score_path.display()));
    }
    record.with_score(score)
}

fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Usage(format!(
            "no .{ext} files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

/// Every `<method>.txt` in `dir`, aligned to `n` points, in name order.
fn method_scores(dir: &Path, n: usize) -> Result<Vec<MethodScore>> {
    files_with_extension(dir, "txt")?
        .into_iter()
        .map(|p| {
            let (score, warning) = align_score(load_score(&p)?, n)
                .map_err(|e| Error::InvalidData(format!("{}: {e}", p.display())))?;
            if let Some(w) = warning {
                warn(&format!("{}: {w}", p.display()));
            }
            Ok(MethodScore::new(vus_core::io::series_id(&p), score))
        })
        .collect()
}

fn plain_scores(dir: &Path, n: usize) -> Result<Vec<Vec<f64>>> {
    Ok(method_scores(dir, n)?
        .into_iter()
        .map(|m| m.score)
        .collect())
}

fn sweep_values(a: &BenchArgs, param: SweepParam) -> Result<Vec<f64>> {
    if let Some(list) = &a.values {
        return list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("--values: `{v}` is not a number")))
            })
            .collect();
    }
    let (Some(min), Some(max), Some(steps)) = (a.min, a.max, a.steps) else {
        return Err(Error::Usage(
            "give either --values or all of --min, --max, --steps".into(),
        ));
    };
    if steps == 0 || max < min {
        return Err(Error::Usage(
            "--steps must be positive and --max at least --min".into(),
        ));
    }
    let integral = param.integral();
    let mut values: Vec<f64> = (0..steps)
        .map(|i| {
            let v = if steps == 1 {
                min
            } else {
                min + (max - min) * i as f64 / (steps - 1) as f64
            };
            if integral {
                v.round()
            } else {
                v
            }
        })
        .collect();
    values.dedup();
    Ok(values)
}

fn bench(a: BenchArgs) -> Result<String> {
    let param: SweepParam = a.param.parse()?;
    let values = sweep_values(&a, param)?;
    let impls = TimedImpl::parse_list(&a.impls)?;
    let base = TimingConfig {
        spec: SynthSpec {
            seed: a.seed,
            ..SynthSpec::default()
        },
        ..TimingConfig::default()
    };
    // timings stay on this thread regardless of the worker pool
    let result = run_timing_sweep(param, &values, &impls, a.reps, &base)?;
    let fits = match fit_slopes(&result) {
        Ok(f) => Some(f),
        Err(e) => {
            warn(&format!("no regression: {e}"));
            None
        }
    };
    match a.out {
        OutFormat::Json => to_json(&json!({ "result": result, "fits": fits })),
        OutFormat::Csv => {
            let r = |v: f64| round_sig(v, JSON_DIGITS);
            let mut out = String::from("param,value,impl,rep,seconds\n");
            for row in &result.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    param,
                    row.value,
                    row.implementation,
                    row.rep,
                    r(row.seconds)
                ));
            }
            if let Some(fits) = fits {
                out.push_str("\nimpl,slope,intercept,r2,degenerate\n");
                for (which, f) in fits {
                    out.push_str(&format!(
                        "{which},{},{},{},{}\n",
                        r(f.slope),
                        r(f.intercept),
                        r(f.r2),
                        f.degenerate
                    ));
                }
            }
            Ok(out)
        }
    }
}
