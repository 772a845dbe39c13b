//! Repeated trials over a grid of source pairs and SNRs, with per-method
//! aggregation.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::{run_trial, derive_seed, Method, MethodSettings, SourceKind, TrialRecord};
use crate::error::{Error, Result};
use crate::search::AngleGrid;

/// Bench configuration, read from `key = value` lines:
///
/// ```text
/// trials = 20
/// T = 16384
/// snr = none, 100
/// methods = mi, o3, ftpca, derivpca, sobi
/// sources = sine_bin:10 + sine_bin:100; band_noise:0.05:0.3 + band_noise:1.0:2.0
/// master_seed = 1
/// ```
///
/// Optional keys: `grid_start`, `grid_stop`, `grid_step` (degrees),
/// `omega0_step`, `offset_steps`, `lags`, `amuse_lag`, `bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub trials: usize,
    pub t_len: usize,
    pub snrs: Vec<Option<f64>>,
    pub methods: Vec<Method>,
    pub sources: Vec<[SourceKind; 2]>,
    pub master_seed: u64,
    pub settings: MethodSettings,
}

fn config_error(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn parse_snr(s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("none") || s.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        _ => Err(Error::InvalidParameter(format!(
            "snr must be a positive number or none, got {s:?}"
        ))),
    }
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut trials = None;
        let mut t_len = 16384;
        let mut snrs = vec![None];
        let mut methods = None;
        let mut sources = None;
        let mut master_seed = 0;
        let mut settings = MethodSettings::default();
        let mut grid = (settings.grid.start, settings.grid.stop, settings.grid.step);
        let mut seen_any = false;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            seen_any = true;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(line_no, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| config_error(line_no, format!("{key}: not a number: {v:?}")))
            };
            let int = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|_| config_error(line_no, format!("{key}: not a count: {v:?}")))
            };
            let wrap = |e: Error| config_error(line_no, format!("{key}: {e}"));
            match key {
                "trials" => trials = Some(int(value)?),
                "T" | "samples" => t_len = int(value)?,
                "snr" => {
                    snrs = value
                        .split(',')
                        .map(parse_snr)
                        .collect::<Result<_>>()
                        .map_err(wrap)?
                }
                "methods" => {
                    methods = Some(
                        value
                            .split(',')
                            .map(str::parse)
                            .collect::<Result<Vec<Method>>>()
                            .map_err(wrap)?,
                    )
                }
                "sources" => {
                    let pairs = value
                        .split(';')
                        .filter(|p| !p.trim().is_empty())
                        .map(|p| {
                            let members: Vec<&str> = p.split('+').collect();
                            match members[..] {
                                [a, b] => Ok([a.parse()?, b.parse()?]),
                                _ => Err(Error::InvalidParameter(format!(
                                    "source pair {p:?} must have two members joined by +"
                                ))),
                            }
                        })
                        .collect::<Result<Vec<_>>>()
                        .map_err(wrap)?;
                    sources = Some(pairs);
                }
                "master_seed" | "seed" => {
                    master_seed = value
                        .parse()
                        .map_err(|_| config_error(line_no, format!("master_seed: not a seed: {value:?}")))?
                }
                "grid_start" => grid.0 = num(value)?,
                "grid_stop" => grid.1 = num(value)?,
                "grid_step" => grid.2 = num(value)?,
                "omega0_step" => settings.heuristic.grid_step = num(value)?,
                "offset_steps" => settings.heuristic.offset_steps = int(value)?,
                "lags" => settings.lags = value.parse().map_err(wrap)?,
                "amuse_lag" => settings.amuse_lag = int(value)?,
                "bins" => settings.mi_bins = Some(int(value)?),
                other => return Err(config_error(line_no, format!("unknown key {other:?}"))),
            }
        }

        if !seen_any {
            return Err(Error::Config("empty bench config".into()));
        }
        let trials = trials.ok_or_else(|| Error::Config("missing key: trials".into()))?;
        if trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let methods = methods.ok_or_else(|| Error::Config("missing key: methods".into()))?;
        let sources = sources.ok_or_else(|| Error::Config("missing key: sources".into()))?;
        if methods.is_empty() || sources.is_empty() || snrs.is_empty() {
            return Err(Error::Config("methods, sources and snr must be non-empty".into()));
        }
        settings.grid = AngleGrid::new(grid.0, grid.1, grid.2)
            .map_err(|e| Error::Config(format!("angle grid: {e}")))?;
        Ok(Self {
            trials,
            t_len,
            snrs,
            methods,
            sources,
            master_seed,
            settings,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub snr: Option<f64>,
    pub trials: usize,
    pub failed: usize,
    /// Over successful trials only; NaN when every trial failed.
    pub mean_error_deg: f64,
    /// Population standard deviation over successful trials.
    pub std_error_deg: f64,
    pub mean_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<MethodSummary>,
}

/// Mean and spread per (method, snr), in the order given.
pub fn aggregate(records: &[TrialRecord], methods: &[Method], snrs: &[Option<f64>]) -> Vec<MethodSummary> {
    let mut out = Vec::new();
    for &method in methods {
        for &snr in snrs {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == method && r.snr == snr)
                .collect();
            let errors: Vec<f64> = group.iter().filter_map(|r| r.error_deg).collect();
            let n = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / n;
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
            out.push(MethodSummary {
                method,
                snr,
                trials: group.len(),
                failed: group.len() - errors.len(),
                mean_error_deg: mean,
                std_error_deg: var.sqrt(),
                mean_time_s: group.iter().map(|r| r.time_s).sum::<f64>() / group.len().max(1) as f64,
            });
        }
    }
    out
}

/// Runs every (source pair, snr, trial) combination. Trials run in
/// parallel; each one's seed depends only on the master seed, the pair
/// index and the trial index, so the result does not depend on
/// scheduling.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    let mut jobs = Vec::new();
    for (p, kinds) in config.sources.iter().enumerate() {
        for &snr in &config.snrs {
            for trial in 0..config.trials {
                jobs.push((kinds, snr, derive_seed(config.master_seed, &[p as u64, trial as u64])));
            }
        }
    }
    let per_trial = jobs
        .par_iter()
        .enumerate()
        .map(|(id, (kinds, snr, seed))| {
            run_trial(id, kinds, &config.methods, config.t_len, *snr, *seed, &config.settings)
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let summary = aggregate(&records, &config.methods, &config.snrs);
    Ok(BenchReport { records, summary })
}

fn snr_field(snr: Option<f64>) -> String {
    snr.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn opt_field(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Deterministic aggregate table; timing is kept out so reruns compare
/// byte for byte.
pub fn aggregate_csv(summary: &[MethodSummary]) -> String {
    let mut s = String::from("method,snr,trials,failed,mean_error_deg,std_error_deg\n");
    for m in summary {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            m.method,
            snr_field(m.snr),
            m.trials,
            m.failed,
            m.mean_error_deg,
            m.std_error_deg
        );
    }
    s
}

pub fn timing_csv(summary: &[MethodSummary]) -> String {
    let mut s = String::from("method,snr,mean_time_s\n");
    for m in summary {
        let _ = writeln!(s, "{},{},{}", m.method, snr_field(m.snr), m.mean_time_s);
    }
    s
}

/// One row per (trial, method); failed trials leave the estimate blank and
/// list their reasons as trailing comment lines.
pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from("trial_id,method,theta_true,theta_est,error_deg,time_s,snr\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.trial_id,
            r.method,
            r.theta_true,
            opt_field(r.theta_est),
            opt_field(r.error_deg),
            r.time_s,
            snr_field(r.snr)
        );
    }
    for r in records.iter().filter(|r| r.failed()) {
        let _ = writeln!(
            s,
            "# trial {} {} failed: {}",
            r.trial_id,
            r.method,
            r.failure.as_deref().unwrap_or("")
        );
    }
    s
}
