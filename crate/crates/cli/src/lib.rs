//! Command-line front end for `arcsep`.
//!
//! Every command writes its main result to a file and prints diagnostics
//! as `#` comment lines, so stdout stays parseable as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use arcsep::harness::{
    aggregate_csv, run_bench, run_method, timing_csv, trials_csv, true_theta, BenchConfig, Method,
    MethodSettings,
};
use arcsep::baselines::LagSet;
use arcsep::linalg::{self, Mat2};
use arcsep::objectives::ObjectiveKind;
use arcsep::search::{brute_force_search, AngleGrid};
use arcsep::spectral::{
    f1_statistic, f2_f3, ftpca_fixed, heuristic_search, omega0_grid, scan_covariances,
    CrossSpectrum, HeuristicConfig, KernelSpec,
};
use arcsep::whitening::{standardize, whiten};
use arcsep::{io, Error, Result, TimeSeriesSet};
use clap::{Args, Parser, Subcommand};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_IO: i32 = 4;

const WAV_RATE: u32 = 44_100;

#[derive(Debug, Parser)]
#[command(name = "arcsep", version, about = "Two-channel blind source separation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix a two-channel source file with a given or random 2x2 matrix.
    Mix(MixArgs),
    /// Whiten a two-channel mixture and undo the remaining rotation.
    Separate(SeparateArgs),
    /// Normalized objective curves over the rotation angle.
    ScanObjective(ScanObjectiveArgs),
    /// f1 and spectral-covariance entries over the kernel shift.
    ScanOmega0(ScanOmega0Args),
    /// Repeated synthetic trials from a config file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// Source signals (CSV or 16-bit WAV).
    pub input: PathBuf,
    /// Row-major mixing matrix a11,a12,a21,a22.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "seed")]
    pub matrix: Option<Vec<f64>>,
    /// Seed for a random well-conditioned mixing matrix.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Linear signal-to-noise ratio of added sensor noise.
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct GridArgs {
    /// First angle of the search grid, degrees.
    #[arg(long, default_value_t = -90.0, allow_negative_numbers = true)]
    pub grid_start: f64,
    /// End of the search grid (exclusive), degrees.
    #[arg(long, default_value_t = 90.0, allow_negative_numbers = true)]
    pub grid_stop: f64,
    /// Search grid step, degrees.
    #[arg(long, default_value_t = 0.1)]
    pub grid_step: f64,
}

impl GridArgs {
    pub fn grid(&self) -> Result<AngleGrid> {
        AngleGrid::new(self.grid_start, self.grid_stop, self.grid_step)
    }
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    pub input: PathBuf,
    /// One of: o1..o5, o3tilde, mi, g1, g2, g3, ftpca, derivpca, sobi, amuse.
    #[arg(long, default_value = "ftpca")]
    pub method: String,
    /// Fixed kernel shift for ftpca, rad/sample; the heuristic scan is used
    /// when absent.
    #[arg(long)]
    pub omega0: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Kernel-shift grid step for the ftpca heuristic, rad/sample.
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    /// Candidate distance from the f1 minimizer, in grid steps.
    #[arg(long, default_value_t = 100)]
    pub offset_steps: usize,
    /// SOBI lags (comma list or a..b); the first is used by amuse.
    #[arg(long, default_value = "1..10")]
    pub lags: String,
    /// Histogram bins for mi.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanObjectiveArgs {
    pub input: PathBuf,
    /// Objectives to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "o1,o2,o3,o5,mi")]
    pub objectives: Vec<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanOmega0Args {
    pub input: PathBuf,
    /// Kernel-shift grid step, rad/sample.
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    /// Known sources; adds f2 and f3 columns.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub config: PathBuf,
    /// Directory for aggregate.csv, trials.csv and timing.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        e if e.is_degeneracy() => EXIT_DEGENERATE,
        _ => EXIT_USAGE,
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Mix(a) => cmd_mix(&a, stdout),
        Command::Separate(a) => cmd_separate(&a, stdout),
        Command::ScanObjective(a) => cmd_scan_objective(&a, stdout),
        Command::ScanOmega0(a) => cmd_scan_omega0(&a, stdout),
        Command::Bench(a) => cmd_bench(&a, stdout),
    }
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "# {}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_pair(path: &Path) -> Result<TimeSeriesSet> {
    let x = io::load_signal(path)?;
    if x.n_channels() != 2 {
        return Err(Error::Shape(format!(
            "{} has {} channels; expected 2",
            path.display(),
            x.n_channels()
        )));
    }
    Ok(x)
}

/// Writes CSV, or WAV when the extension says so. WAV output is scaled to
/// fit 16-bit range only when some sample would clip.
fn save_signal(path: &Path, x: &TimeSeriesSet, comments: &[String], out: &mut dyn Write) -> Result<()> {
    if io::is_wav(path) {
        let peak = x
            .channels()
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 1.0 {
            let scale = 0.99 / peak;
            say(out, format!("wav_scale={scale}"))?;
            let scaled = x.transform(&[vec![scale, 0.0], vec![0.0, scale]])?;
            return io::save_wav(path, &scaled, WAV_RATE);
        }
        io::save_wav(path, x, WAV_RATE)
    } else {
        write_text(path, &io::format_csv(x, comments))
    }
}

fn fmt_matrix(m: &Mat2) -> String {
    format!("{},{},{},{}", m[0][0], m[0][1], m[1][0], m[1][1])
}

pub fn cmd_mix(args: &MixArgs, out: &mut dyn Write) -> Result<()> {
    let s = load_pair(&args.input)?;
    let a: Mat2 = match (&args.matrix, args.seed) {
        (Some(m), _) => match m[..] {
            [a, b, c, d] => [[a, b], [c, d]],
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "--matrix needs 4 values, got {}",
                    m.len()
                )))
            }
        },
        (None, Some(seed)) => arcsep::harness::random_mixing(seed)?,
        (None, None) => {
            return Err(Error::InvalidParameter("mix needs --matrix or --seed".into()))
        }
    };
    let clean = s.transform(&linalg::to_rows(&a))?;
    let x = arcsep::harness::add_noise(&clean, args.snr, args.seed.unwrap_or(0).wrapping_add(1))?;
    let mut comments = vec![format!("mixing={}", fmt_matrix(&a))];
    // rotation between the whitened mixture and the standardized sources
    if let (Ok(st), Ok(w)) = (standardize(&s), whiten(&x)) {
        comments.push(format!("theta_true_deg={}", true_theta(&st, &w.whitened)));
    }
    for c in &comments {
        say(out, c)?;
    }
    save_signal(&args.out, &x, &comments, out)
}

fn settings_from(args: &SeparateArgs) -> Result<MethodSettings> {
    let lags: LagSet = args.lags.parse()?;
    Ok(MethodSettings {
        grid: args.grid.grid()?,
        heuristic: HeuristicConfig {
            grid_step: args.step,
            offset_steps: args.offset_steps,
        },
        amuse_lag: lags.lags()[0],
        lags,
        mi_bins: args.bins,
    })
}

pub fn cmd_separate(args: &SeparateArgs, out: &mut dyn Write) -> Result<()> {
    let method: Method = args.method.parse()?;
    let settings = settings_from(args)?;
    let x = load_pair(&args.input)?;
    let z = whiten(&x)?.whitened;
    let result = match (method, args.omega0) {
        (Method::FtPca, Some(omega0)) => ftpca_fixed(&z, &KernelSpec::shifted(omega0)?)?,
        (Method::FtPca, None) => {
            let (scan, result) = heuristic_search(&z, &settings.heuristic)?;
            say(out, format!("argmin_omega0={}", scan.argmin_omega0))?;
            for c in &scan.candidates {
                match &c.residual {
                    Ok(r) => say(out, format!("candidate omega0={} residual={r:e}", c.omega0))?,
                    Err(e) => say(out, format!("candidate omega0={} rejected: {e}", c.omega0))?,
                }
            }
            if let Some(w) = scan.chosen_omega0 {
                say(out, format!("chosen_omega0={w}"))?;
            }
            result
        }
        (_, Some(_)) => {
            return Err(Error::InvalidParameter("--omega0 applies to ftpca only".into()))
        }
        (m, None) => run_method(&z, m, &settings)?,
    };
    say(out, format!("method={method}"))?;
    say(out, result.summary())?;
    say(out, format!("unmixing={}", fmt_matrix(&result.unmixing)))?;
    let comments = vec![format!("method={method}"), result.summary()];
    save_signal(&args.out, &result.sources, &comments, out)
}

fn normalize(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    values
        .iter()
        .map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 })
        .collect()
}

pub fn cmd_scan_objective(args: &ScanObjectiveArgs, out: &mut dyn Write) -> Result<()> {
    let kinds = args
        .objectives
        .iter()
        .map(|s| {
            s.parse::<ObjectiveKind>().map(|k| match k {
                ObjectiveKind::Mi { .. } => ObjectiveKind::Mi { bins: args.bins },
                k => k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = args.grid.grid()?;
    let z = whiten(&load_pair(&args.input)?)?.whitened;
    let mut columns = Vec::with_capacity(kinds.len());
    for kind in &kinds {
        let curve = brute_force_search(&z, kind, &grid)?;
        say(out, format!("{kind} best_angle={} best_value={:e}", curve.best_angle, curve.best_value))?;
        columns.push(normalize(&curve.values));
    }
    let mut text = String::from("angle");
    for k in &kinds {
        text.push(',');
        text.push_str(k.name());
    }
    text.push('\n');
    for (i, angle) in grid.angles().iter().enumerate() {
        text.push_str(&angle.to_string());
        for c in &columns {
            text.push(',');
            text.push_str(&c[i].to_string());
        }
        text.push('\n');
    }
    write_text(&args.out, &text)
}

pub fn cmd_scan_omega0(args: &ScanOmega0Args, out: &mut dyn Write) -> Result<()> {
    let x = load_pair(&args.input)?;
    let z = whiten(&x)?.whitened;
    let grid = omega0_grid(args.step)?;
    let covs = scan_covariances(&CrossSpectrum::from_signals(&z)?, &grid);
    let truth = match &args.truth {
        Some(p) => {
            let s = standardize(&load_pair(p)?)?;
            if s.n_samples() != z.n_samples() {
                return Err(Error::Shape("truth and input lengths differ".into()));
            }
            Some(scan_covariances(&CrossSpectrum::from_signals(&s)?, &grid))
        }
        None => None,
    };
    let mut text = String::from("omega0,f1,re_z12,abs_z11_minus_z22");
    if truth.is_some() {
        text.push_str(",f2,f3");
    }
    text.push('\n');
    let mut argmin = 0;
    for (i, c) in covs.iter().enumerate() {
        let f1 = f1_statistic(c);
        if f1 < f1_statistic(&covs[argmin]) {
            argmin = i;
        }
        text.push_str(&format!("{},{},{},{}", grid[i], f1, c.c12.re, (c.c11 - c.c22).abs()));
        if let Some(t) = &truth {
            let (f2, f3) = f2_f3(&t[i]);
            text.push_str(&format!(",{f2},{f3}"));
        }
        text.push('\n');
    }
    say(out, format!("argmin_omega0={}", grid[argmin]))?;
    write_text(&args.out, &text)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let config = BenchConfig::load(&args.config)?;
    let report = run_bench(&config)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let aggregate = aggregate_csv(&report.summary);
    write_text(&args.out.join("aggregate.csv"), &aggregate)?;
    write_text(&args.out.join("trials.csv"), &trials_csv(&report.records))?;
    let timing = timing_csv(&report.summary);
    write_text(&args.out.join("timing.csv"), &timing)?;
    out.write_all(aggregate.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    for line in timing.lines() {
        say(out, line)?;
    }
    Ok(())
}
