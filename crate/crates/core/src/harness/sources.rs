//! Synthetic source generation, random mixing and sensor noise.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::io;
use crate::linalg::{self, Mat2};
use crate::signal::TimeSeriesSet;
use crate::whitening::standardize;

pub const MIN_SOURCE_SAMPLES: usize = 1024;
pub const MAX_CONDITION: f64 = 100.0;
pub const MIN_ABS_DET: f64 = 1e-3;
pub const MAX_MIXING_DRAWS: usize = 1000;

/// Cutoff of the slow amplitude envelope of band noise, rad/sample.
pub const ENVELOPE_CUTOFF: f64 = 0.01;
/// Log-amplitude standard deviation of the envelope.
pub const ENVELOPE_DEPTH: f64 = 1.0;
const AR_BURN_IN: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// `sin(2π·bin·t/T + φ)` with a random phase.
    SineBin { bin: f64 },
    /// Gaussian noise under a slow log-normal envelope, brick-wall filtered
    /// to `[lo, hi]` rad/sample. The envelope makes the marginal
    /// distribution heavy-tailed so that entropy-based methods can see it.
    BandNoise { lo: f64, hi: f64 },
    /// `x[t] = a·x[t−1] + e[t]` with Gaussian innovations.
    Ar1 { coef: f64 },
    /// `((t + φ) mod P)/P − 1/2` with a random phase.
    Sawtooth { period: f64 },
    /// A random window of channel 0 of a 16-bit WAV file.
    WavFile { path: PathBuf },
}

impl SourceKind {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            SourceKind::SineBin { bin } if !(*bin > 0.0 && bin.is_finite()) => {
                bad(format!("sine bin must be positive, got {bin}"))
            }
            SourceKind::BandNoise { lo, hi } if !(0.0 < *lo && lo < hi && *hi < PI) => {
                bad(format!("band edges must satisfy 0 < lo < hi < pi, got [{lo}, {hi}]"))
            }
            SourceKind::Ar1 { coef } if !(coef.abs() < 1.0) => {
                bad(format!("AR coefficient must have magnitude below 1, got {coef}"))
            }
            SourceKind::Sawtooth { period } if !(*period >= 2.0 && period.is_finite()) => {
                bad(format!("sawtooth period must be at least 2 samples, got {period}"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceKind::SineBin { bin } => write!(f, "sine_bin:{bin}"),
            SourceKind::BandNoise { lo, hi } => write!(f, "band_noise:{lo}:{hi}"),
            SourceKind::Ar1 { coef } => write!(f, "ar1:{coef}"),
            SourceKind::Sawtooth { period } => write!(f, "sawtooth:{period}"),
            SourceKind::WavFile { path } => write!(f, "wav_file:{}", path.display()),
        }
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    /// `kind:param[:param]`, e.g. `band_noise:0.05:0.3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let bad = || {
            Error::InvalidParameter(format!(
                "cannot parse source {s:?}; expected sine_bin:K, band_noise:LO:HI, ar1:A, sawtooth:P or wav_file:PATH"
            ))
        };
        let nums = || -> Result<Vec<f64>> {
            rest.split(':')
                .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let parsed = match kind {
            "sine_bin" => match nums()?[..] {
                [bin] => SourceKind::SineBin { bin },
                _ => return Err(bad()),
            },
            "band_noise" => match nums()?[..] {
                [lo, hi] => SourceKind::BandNoise { lo, hi },
                _ => return Err(bad()),
            },
            "ar1" => match nums()?[..] {
                [coef] => SourceKind::Ar1 { coef },
                _ => return Err(bad()),
            },
            "sawtooth" => match nums()?[..] {
                [period] => SourceKind::Sawtooth { period },
                _ => return Err(bad()),
            },
            "wav_file" if !rest.is_empty() => SourceKind::WavFile {
                path: PathBuf::from(rest),
            },
            _ => return Err(bad()),
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub seed: u64,
}

impl SourceSpec {
    pub fn new(kind: SourceKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    /// Raw, unnormalized samples.
    pub fn generate(&self, t_len: usize) -> Result<Vec<f64>> {
        self.kind.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(match &self.kind {
            SourceKind::SineBin { bin } => {
                let phase = rng.random_range(0.0..2.0 * PI);
                let w = 2.0 * PI * bin / t_len as f64;
                (0..t_len).map(|t| (w * t as f64 + phase).sin()).collect()
            }
            SourceKind::BandNoise { lo, hi } => {
                let white = gaussian(&mut rng, t_len);
                let env = envelope(&mut rng, t_len);
                let modulated: Vec<f64> = white.iter().zip(&env).map(|(w, e)| w * e).collect();
                bandpass(&modulated, *lo, *hi)
            }
            SourceKind::Ar1 { coef } => {
                let e = gaussian(&mut rng, t_len + AR_BURN_IN);
                let mut x = vec![0.0; e.len()];
                for t in 1..x.len() {
                    x[t] = coef * x[t - 1] + e[t];
                }
                x.split_off(AR_BURN_IN)
            }
            SourceKind::Sawtooth { period } => {
                let phase = rng.random_range(0.0..*period);
                (0..t_len)
                    .map(|t| ((t as f64 + phase) % period) / period - 0.5)
                    .collect()
            }
            SourceKind::WavFile { path } => {
                let wav = io::load_wav(path)?;
                let n = wav.n_samples();
                if n < t_len {
                    return Err(Error::TooShort {
                        needed: t_len,
                        got: n,
                    });
                }
                let start = rng.random_range(0..=n - t_len);
                wav.channel(0)[start..start + t_len].to_vec()
            }
        })
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn envelope(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let g = bandpass(&gaussian(rng, n), 0.0, ENVELOPE_CUTOFF);
    let mean = g.iter().sum::<f64>() / n as f64;
    let sd = (g.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    g.iter()
        .map(|v| (ENVELOPE_DEPTH * (v - mean) / sd).exp())
        .collect()
}

/// Zeroes every DFT bin whose frequency lies outside `[lo, hi]` rad/sample.
pub fn bandpass(x: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        // frequency of bin k folded onto [0, π]
        let omega = 2.0 * PI * k.min(n - k) as f64 / n as f64;
        if omega < lo || omega > hi {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Two generated channels, standardized to zero mean and identity
/// covariance.
pub fn generate_sources(pair: &[SourceSpec; 2], t_len: usize) -> Result<TimeSeriesSet> {
    if t_len < MIN_SOURCE_SAMPLES {
        return Err(Error::TooShort {
            needed: MIN_SOURCE_SAMPLES,
            got: t_len,
        });
    }
    let raw = TimeSeriesSet::new(vec![pair[0].generate(t_len)?, pair[1].generate(t_len)?])?;
    standardize(&raw)
}

/// Standard-normal 2×2 matrix, redrawn until it is well conditioned.
pub fn random_mixing(seed: u64) -> Result<Mat2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_MIXING_DRAWS {
        let mut a = [[0.0; 2]; 2];
        for v in a.iter_mut().flatten() {
            *v = rng.sample(StandardNormal);
        }
        if linalg::condition_number(&a) <= MAX_CONDITION && linalg::det(&a).abs() >= MIN_ABS_DET {
            return Ok(a);
        }
    }
    Err(Error::DegenerateInput(format!(
        "no well-conditioned mixing matrix in {MAX_MIXING_DRAWS} draws"
    )))
}

/// Adds white Gaussian noise of variance `var(x_i)/snr` to every channel;
/// `None` leaves the signals untouched.
pub fn add_noise(x: &TimeSeriesSet, snr: Option<f64>, seed: u64) -> Result<TimeSeriesSet> {
    let Some(snr) = snr else {
        return Ok(x.clone());
    };
    if !(snr > 0.0) {
        return Err(Error::InvalidParameter(format!("snr must be positive, got {snr}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = x.covariance();
    let channels = x
        .channels()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let sd = (cov[i][i] / snr).sqrt();
            c.iter()
                .map(|v| v + sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    TimeSeriesSet::new(channels)
}
