//! Synthetic experiments: generate sources, mix, add noise, whiten, run
//! each separation method and score it against the known rotation.

mod bench;
mod sources;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use bench::{
    aggregate, aggregate_csv, timing_csv, trials_csv, BenchConfig, BenchReport, MethodSummary,
    run_bench,
};
pub use sources::{
    add_noise, bandpass, generate_sources, random_mixing, SourceKind, SourceSpec,
    ENVELOPE_CUTOFF, ENVELOPE_DEPTH, MAX_CONDITION, MAX_MIXING_DRAWS, MIN_ABS_DET,
    MIN_SOURCE_SAMPLES,
};

use crate::baselines::{amuse, sobi, LagSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::objectives::ObjectiveKind;
use crate::search::{angle_error, separate_by_search, AngleGrid};
use crate::separation::SeparationResult;
use crate::signal::{cross_moment, TimeSeriesSet};
use crate::spectral::{derivative_pca, heuristic_search, HeuristicConfig};
use crate::whitening::whiten;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Search(ObjectiveKind),
    FtPca,
    DerivPca,
    Sobi,
    Amuse,
}

impl Method {
    pub fn all_names() -> Vec<&'static str> {
        let mut names = ObjectiveKind::ALL_NAMES.to_vec();
        names.extend(["ftpca", "derivpca", "sobi", "amuse"]);
        names
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Search(kind) => kind.name(),
            Method::FtPca => "ftpca",
            Method::DerivPca => "derivpca",
            Method::Sobi => "sobi",
            Method::Amuse => "amuse",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ftpca" | "ft-pca" => Ok(Method::FtPca),
            "derivpca" | "derivative-pca" => Ok(Method::DerivPca),
            "sobi" => Ok(Method::Sobi),
            "amuse" => Ok(Method::Amuse),
            other => other.parse().map(Method::Search).map_err(|_| {
                Error::InvalidParameter(format!(
                    "unknown method {s:?}; valid methods: {}",
                    Method::all_names().join(", ")
                ))
            }),
        }
    }
}

/// Parameters shared by every method in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSettings {
    pub grid: AngleGrid,
    pub heuristic: HeuristicConfig,
    pub lags: LagSet,
    pub amuse_lag: usize,
    /// Histogram bins for MI; `None` picks them from `T`.
    pub mi_bins: Option<usize>,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            grid: AngleGrid::default(),
            heuristic: HeuristicConfig::default(),
            lags: LagSet::default(),
            amuse_lag: 1,
            mi_bins: None,
        }
    }
}

/// Runs one step-two method on whitened `z`.
pub fn run_method(z: &TimeSeriesSet, method: Method, settings: &MethodSettings) -> Result<SeparationResult> {
    match method {
        Method::Search(kind) => {
            let kind = match kind {
                ObjectiveKind::Mi { bins: None } => ObjectiveKind::Mi {
                    bins: settings.mi_bins,
                },
                k => k,
            };
            kind.validate()?;
            separate_by_search(z, &kind, &settings.grid)
        }
        Method::FtPca => heuristic_search(z, &settings.heuristic).map(|(_, r)| r),
        Method::DerivPca => derivative_pca(z),
        Method::Sobi => sobi(z, &settings.lags),
        Method::Amuse => amuse(z, settings.amuse_lag),
    }
}

/// Angle of the rotation taking whitened `z` to the true sources `s`,
/// read from the cross moment `(1/T)·s·zᵀ`.
pub fn true_theta(s: &TimeSeriesSet, z: &TimeSeriesSet) -> f64 {
    let m = linalg::from_rows(&cross_moment(s.channels(), z.channels()));
    linalg::rotation_angle_deg(&m)
}

/// SplitMix64 finalizer folded over `parts`; used to derive independent
/// per-trial seeds from one master seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

/// The synthetic observation of one trial.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub sources: TimeSeriesSet,
    pub mixing: linalg::Mat2,
    pub mixtures: TimeSeriesSet,
    pub whitened: TimeSeriesSet,
    pub theta_true: f64,
}

/// Generate → mix → optional noise → whiten. Sources and mixing depend on
/// `seed` only, so runs at different SNRs share them.
pub fn prepare_trial(
    kinds: &[SourceKind; 2],
    t_len: usize,
    snr: Option<f64>,
    seed: u64,
) -> Result<TrialData> {
    let pair = [
        SourceSpec::new(kinds[0].clone(), derive_seed(seed, &[1])),
        SourceSpec::new(kinds[1].clone(), derive_seed(seed, &[2])),
    ];
    let sources = generate_sources(&pair, t_len)?;
    let mixing = random_mixing(derive_seed(seed, &[3]))?;
    let clean = sources.transform(&linalg::to_rows(&mixing))?;
    let mixtures = add_noise(&clean, snr, derive_seed(seed, &[4]))?;
    let whitened = whiten(&mixtures)?.whitened;
    let theta_true = true_theta(&sources, &whitened);
    Ok(TrialData {
        sources,
        mixing,
        mixtures,
        whitened,
        theta_true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub method: Method,
    pub theta_true: f64,
    pub theta_est: Option<f64>,
    /// `angle_error(theta_est, theta_true)`, in `[0, 45]`.
    pub error_deg: Option<f64>,
    pub time_s: f64,
    pub snr: Option<f64>,
    pub failure: Option<String>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Runs every method on one trial. Method errors become failed records.
pub fn run_trial(
    trial_id: usize,
    kinds: &[SourceKind; 2],
    methods: &[Method],
    t_len: usize,
    snr: Option<f64>,
    seed: u64,
    settings: &MethodSettings,
) -> Result<Vec<TrialRecord>> {
    let data = prepare_trial(kinds, t_len, snr, seed)?;
    Ok(methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(&data.whitened, method, settings);
            let time_s = start.elapsed().as_secs_f64();
            let (theta_est, error_deg, failure) = match outcome {
                Ok(r) => (
                    Some(r.theta_deg),
                    Some(angle_error(r.theta_deg, data.theta_true)),
                    None,
                ),
                Err(e) => (None, None, Some(e.to_string())),
            };
            TrialRecord {
                trial_id,
                method,
                theta_true: data.theta_true,
                theta_est,
                error_deg,
                time_s,
                snr,
                failure,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for name in Method::all_names() {
            assert_eq!(name.parse::<Method>().unwrap().name(), name);
        }
        let err = "pca".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("ftpca") && err.contains("o3tilde"));
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, &[0, 1]);
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(8, &[0, 1]));
        assert_eq!(a, derive_seed(7, &[0, 1]));
    }

    #[test]
    fn true_theta_of_known_rotation() {
        let t_len = 2048;
        let w = 2.0 * std::f64::consts::PI / t_len as f64;
        let s = TimeSeriesSet::new(vec![
            (0..t_len).map(|t| 2f64.sqrt() * (3.0 * w * t as f64).sin()).collect(),
            (0..t_len).map(|t| 2f64.sqrt() * (11.0 * w * t as f64).sin()).collect(),
        ])
        .unwrap();
        // z = R(θ)ᵀ·s, so s = R(θ)·z
        let r = linalg::rotation(25f64.to_radians());
        let z = s.transform(&linalg::to_rows(&linalg::transpose(&r))).unwrap();
        assert!((true_theta(&s, &z) - 25.0).abs() < 1e-9);
    }
}
