//! Step two by second-order spectral statistics.
//!
//! For whitened `z` the kernel-weighted spectral covariance
//!
//! ```text
//! Z_ij = (1/T²) Σ_k w_k · K(ω_k) · Z_i[k] · conj(Z_j[k])
//! ```
//!
//! over the one-sided DFT grid `ω_k = 2πk/T` (weights `w_k` = 2 for interior
//! bins, 1 for DC and Nyquist) is conjugated by the unknown rotation:
//! `C_z = R̂ᵀ·C_s·R̂`. When the kernel makes the source statistic diagonal
//! with distinct entries, the eigenvectors of `Re(C_z)` recover `R̂`. Under
//! a flat kernel `Re(C_z)` is the identity for any whitened input, which
//! carries no information. The imaginary part of a one-sided sum does not
//! cancel and is reported as a residual only.
//!
//! Trace and determinant of `C` do not depend on the rotation, so neither
//! does `f1 = (Z₁₁ − Z₂₂)² + 4|Z₁₂|² = (tr C)² − 4·det C`. The ω0 heuristic
//! minimizes `f1` over kernel shifts, then steps a fixed distance away on
//! either side and keeps the candidate whose decomposition leaves the
//! smallest off-diagonal residual.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::separation::SeparationResult;
use crate::signal::{derivative, TimeSeriesSet};

pub const MIN_DFT_SAMPLES: usize = 4;

/// One-sided DFT of each channel with Parseval weights.
#[derive(Debug, Clone)]
pub struct SpectrumSet {
    n_samples: usize,
    coeffs: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
}

impl SpectrumSet {
    pub fn n_channels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_bins(&self) -> usize {
        self.weights.len()
    }

    pub fn coeffs(&self, channel: usize) -> &[Complex64] {
        &self.coeffs[channel]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Angular frequency of bin `k` in rad/sample.
    pub fn omega(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_samples as f64
    }

    /// `Σ_k w_k·|Z_i[k]|² / T`, equal to `Σ_t z_i[t]²` by Parseval.
    pub fn energy(&self, channel: usize) -> f64 {
        self.coeffs[channel]
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.norm_sqr())
            .sum::<f64>()
            / self.n_samples as f64
    }
}

pub fn dft(x: &TimeSeriesSet) -> Result<SpectrumSet> {
    let t_len = x.n_samples();
    if t_len < MIN_DFT_SAMPLES {
        return Err(Error::TooShort {
            needed: MIN_DFT_SAMPLES,
            got: t_len,
        });
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(t_len);
    let n_bins = t_len / 2 + 1;
    let coeffs = x
        .channels()
        .iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut buf);
            buf.truncate(n_bins);
            buf
        })
        .collect();
    let weights = (0..n_bins)
        .map(|k| {
            let nyquist = t_len % 2 == 0 && k == t_len / 2;
            if k == 0 || nyquist {
                1.0
            } else {
                2.0
            }
        })
        .collect();
    Ok(SpectrumSet {
        n_samples: t_len,
        coeffs,
        weights,
    })
}

/// A nonnegative frequency weighting `K(ω)`.
pub trait SpectralKernel: Sync {
    fn weight(&self, omega: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `ω²`; equivalent to a covariance of derivatives.
    K1,
    /// `1/(1 + |ω|)`.
    K2,
    /// `1/(1 + |ω − ω0|)` with `ω0 ∈ [0, π]`.
    K3 { omega0: f64 },
}

impl KernelSpec {
    pub fn shifted(omega0: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&omega0) {
            return Err(Error::InvalidParameter(format!(
                "kernel shift omega0 must lie in [0, pi], got {omega0}"
            )));
        }
        Ok(KernelSpec::K3 { omega0 })
    }
}

impl SpectralKernel for KernelSpec {
    fn weight(&self, omega: f64) -> f64 {
        match *self {
            KernelSpec::K1 => omega * omega,
            KernelSpec::K2 => 1.0 / (1.0 + omega.abs()),
            KernelSpec::K3 { omega0 } => 1.0 / (1.0 + (omega - omega0).abs()),
        }
    }
}

/// Hermitian 2×2 kernel-weighted spectral covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCovariance {
    pub c11: f64,
    pub c22: f64,
    pub c12: Complex64,
}

impl SpectralCovariance {
    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.c11, 0.0), self.c12],
            [self.c12.conj(), Complex64::new(self.c22, 0.0)],
        ]
    }

    pub fn real_part(&self) -> Mat2 {
        [[self.c11, self.c12.re], [self.c12.re, self.c22]]
    }

    pub fn trace(&self) -> f64 {
        self.c11 + self.c22
    }

    pub fn det(&self) -> f64 {
        self.c11 * self.c22 - self.c12.norm_sqr()
    }

    /// `Mᵀ·C·M` for a real 2×2 `M`.
    pub fn conjugated(&self, m: &Mat2) -> [[Complex64; 2]; 2] {
        let c = self.entries();
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i][j] += m[k][i] * c[k][l] * m[l][j];
                    }
                }
            }
        }
        out
    }
}

/// Per-bin weighted cross products of a two-channel spectrum, computed once
/// so that any kernel reduces to one weighted sum per entry.
#[derive(Debug, Clone)]
pub struct CrossSpectrum {
    omegas: Vec<f64>,
    p11: Vec<f64>,
    p22: Vec<f64>,
    p12: Vec<Complex64>,
}

impl CrossSpectrum {
    pub fn new(spec: &SpectrumSet) -> Result<Self> {
        if spec.n_channels() != 2 {
            return Err(Error::Arity(format!(
                "spectral covariance needs 2 channels, got {}",
                spec.n_channels()
            )));
        }
        let norm = 1.0 / (spec.n_samples as f64).powi(2);
        let (a, b) = (spec.coeffs(0), spec.coeffs(1));
        let w = spec.weights();
        Ok(Self {
            omegas: (0..spec.n_bins()).map(|k| spec.omega(k)).collect(),
            p11: a.iter().zip(w).map(|(z, w)| w * norm * z.norm_sqr()).collect(),
            p22: b.iter().zip(w).map(|(z, w)| w * norm * z.norm_sqr()).collect(),
            p12: a
                .iter()
                .zip(b)
                .zip(w)
                .map(|((p, q), w)| p * q.conj() * (w * norm))
                .collect(),
        })
    }

    pub fn from_signals(z: &TimeSeriesSet) -> Result<Self> {
        Self::new(&dft(z)?)
    }

    pub fn covariance<K: SpectralKernel + ?Sized>(&self, kernel: &K) -> SpectralCovariance {
        let mut c11 = 0.0;
        let mut c22 = 0.0;
        let mut c12 = Complex64::new(0.0, 0.0);
        for (k, &om) in self.omegas.iter().enumerate() {
            let w = kernel.weight(om);
            c11 += w * self.p11[k];
            c22 += w * self.p22[k];
            c12 += self.p12[k] * w;
        }
        SpectralCovariance { c11, c22, c12 }
    }
}

pub fn spectral_covariance<K: SpectralKernel + ?Sized>(
    spec: &SpectrumSet,
    kernel: &K,
) -> Result<SpectralCovariance> {
    Ok(CrossSpectrum::new(spec)?.covariance(kernel))
}

/// `(Z₁₁ − Z₂₂)² + 4|Z₁₂|²`.
pub fn f1_statistic(c: &SpectralCovariance) -> f64 {
    (c.c11 - c.c22).powi(2) + 4.0 * c.c12.norm_sqr()
}

/// `(f2, f3) = ((S₁₁ − S₂₂)², 4|S₁₂|²)` for a source-domain covariance;
/// their sum is `f1` of the same matrix, and of any rotation of it.
pub fn f2_f3(s: &SpectralCovariance) -> (f64, f64) {
    ((s.c11 - s.c22).powi(2), 4.0 * s.c12.norm_sqr())
}

fn require_pair(z: &TimeSeriesSet) -> Result<()> {
    if z.n_channels() != 2 {
        return Err(Error::Arity(format!(
            "second-order separation needs 2 channels, got {}",
            z.n_channels()
        )));
    }
    Ok(())
}

fn trivial_kernel(gap: f64, threshold: f64) -> Error {
    Error::TrivialKernel { gap, threshold }
}

fn separate_from_covariance(z: &TimeSeriesSet, c: &SpectralCovariance) -> Result<SeparationResult> {
    SeparationResult::from_symmetric(z, &c.real_part(), Some(c.c12.im.abs()), 0.0, trivial_kernel)
}

/// FT-PCA with a fixed kernel: eigendecomposition of `Re(C_z)`.
pub fn ftpca_fixed<K: SpectralKernel + ?Sized>(
    z: &TimeSeriesSet,
    kernel: &K,
) -> Result<SeparationResult> {
    require_pair(z)?;
    let c = CrossSpectrum::from_signals(z)?.covariance(kernel);
    separate_from_covariance(z, &c)
}

/// Eigendecomposition of the derivative covariance `(1/T)·Σ_t z'·z'ᵀ`.
pub fn derivative_pca(z: &TimeSeriesSet) -> Result<SeparationResult> {
    require_pair(z)?;
    let d = derivative(z);
    let t = d.n_samples() as f64;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / t;
    let (a, b) = (d.channel(0), d.channel(1));
    let m = [[dot(a, a), dot(a, b)], [dot(a, b), dot(b, b)]];
    SeparationResult::from_symmetric(z, &m, None, 0.0, trivial_kernel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicConfig {
    /// Spacing of the ω0 grid, rad/sample.
    pub grid_step: f64,
    /// Distance from the f1 minimizer to each candidate, in grid steps.
    pub offset_steps: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.001,
            offset_steps: 100,
        }
    }
}

/// One kernel shift tried by the heuristic.
#[derive(Debug, Clone)]
pub struct KernelCandidate {
    pub omega0: f64,
    /// `|Ŝ₁₂| / |Ŝ₁₁ − Ŝ₂₂|` with `Ŝ = Eᵀ·C·E`, or the reason it was rejected.
    pub residual: std::result::Result<f64, String>,
    pub theta_deg: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HeuristicScan {
    pub omega0_grid: Vec<f64>,
    pub f1: Vec<f64>,
    pub argmin_omega0: f64,
    pub offset_steps: usize,
    pub candidates: Vec<KernelCandidate>,
    pub chosen_omega0: Option<f64>,
}

/// `{0, step, 2·step, …} ∩ [0, π]`.
pub fn omega0_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "omega0 grid step must be positive, got {step}"
        )));
    }
    let n = (PI / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step).collect())
}

/// Spectral covariances under `K3` at every shift of the grid.
pub fn scan_covariances(cross: &CrossSpectrum, grid: &[f64]) -> Vec<SpectralCovariance> {
    grid.par_iter()
        .map(|&omega0| cross.covariance(&KernelSpec::K3 { omega0 }))
        .collect()
}

fn diagonality_residual(c: &SpectralCovariance, unmixing: &Mat2) -> f64 {
    // Ŝ = Eᵀ·C·E with E = unmixingᵀ
    let s_hat = c.conjugated(&linalg::transpose(unmixing));
    s_hat[0][1].norm() / (s_hat[0][0] - s_hat[1][1]).norm()
}

pub fn heuristic_search(
    z: &TimeSeriesSet,
    config: &HeuristicConfig,
) -> Result<(HeuristicScan, SeparationResult)> {
    require_pair(z)?;
    let grid = omega0_grid(config.grid_step)?;
    let cross = CrossSpectrum::from_signals(z)?;
    let covs = scan_covariances(&cross, &grid);
    let f1: Vec<f64> = covs.iter().map(f1_statistic).collect();

    let mut argmin = 0;
    for (i, &v) in f1.iter().enumerate() {
        if v < f1[argmin] {
            argmin = i;
        }
    }
    let argmin_omega0 = grid[argmin];
    let offset = config.offset_steps as f64 * config.grid_step;
    let mut shifts = vec![
        (argmin_omega0 - offset).clamp(0.0, PI),
        (argmin_omega0 + offset).clamp(0.0, PI),
    ];
    shifts.dedup();

    let mut candidates = Vec::with_capacity(shifts.len());
    let mut best: Option<(f64, SeparationResult, f64)> = None;
    for omega0 in shifts {
        let c = cross.covariance(&KernelSpec::K3 { omega0 });
        match separate_from_covariance(z, &c) {
            Ok(result) => {
                let residual = diagonality_residual(&c, &result.unmixing);
                candidates.push(KernelCandidate {
                    omega0,
                    residual: Ok(residual),
                    theta_deg: Some(result.theta_deg),
                });
                if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
                    best = Some((residual, result, omega0));
                }
            }
            Err(e) => candidates.push(KernelCandidate {
                omega0,
                residual: Err(e.to_string()),
                theta_deg: None,
            }),
        }
    }

    let mut scan = HeuristicScan {
        omega0_grid: grid,
        f1,
        argmin_omega0,
        offset_steps: config.offset_steps,
        candidates,
        chosen_omega0: None,
    };
    match best {
        Some((_, result, omega0)) => {
            scan.chosen_omega0 = Some(omega0);
            Ok((scan, result))
        }
        None => Err(Error::NoValidKernel(Box::new(scan))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(t_len: usize, bin: f64, phase: f64) -> Vec<f64> {
        (0..t_len)
            .map(|t| (2.0 * PI * bin * t as f64 / t_len as f64 + phase).sin())
            .collect()
    }

    struct Flat;

    impl SpectralKernel for Flat {
        fn weight(&self, _: f64) -> f64 {
            1.0
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = dft(&TimeSeriesSet::new(vec![x]).unwrap()).unwrap();
        assert_eq!(s.n_bins(), 5);
        assert!(s.coeffs(0).iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        assert!((s.energy(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_energy_in_its_bin() {
        let t_len = 256;
        let x: Vec<f64> = (0..t_len)
            .map(|t| (2.0 * PI * 9.0 * t as f64 / t_len as f64).cos())
            .collect();
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let s = dft(&TimeSeriesSet::new(vec![x]).unwrap()).unwrap();
        let peak = s
            .coeffs(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap()
            .0;
        assert_eq!(peak, 9);
        assert!((s.energy(0) - time_energy).abs() < 1e-10 * time_energy);
    }

    #[test]
    fn odd_length_weights() {
        let s = dft(&TimeSeriesSet::new(vec![vec![1.0, 2.0, 0.5, -1.0, 3.0]]).unwrap()).unwrap();
        assert_eq!(s.weights(), &[1.0, 2.0, 2.0]);
        assert!((s.energy(0) - 15.25).abs() < 1e-12);
    }

    #[test]
    fn too_short_for_dft() {
        assert!(matches!(
            dft(&TimeSeriesSet::new(vec![vec![1.0, 2.0, 3.0]]).unwrap()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn kernel_shapes() {
        assert_eq!(KernelSpec::K1.weight(0.5), 0.25);
        for om in [0.0, 0.3, 2.0, PI] {
            assert_eq!(KernelSpec::K2.weight(om), KernelSpec::K3 { omega0: 0.0 }.weight(om));
        }
        assert!(KernelSpec::shifted(4.0).is_err());
    }

    #[test]
    fn f1_examples() {
        let id = SpectralCovariance {
            c11: 1.0,
            c22: 1.0,
            c12: Complex64::new(0.0, 0.0),
        };
        assert_eq!(f1_statistic(&id), 0.0);
        let d = SpectralCovariance {
            c11: 3.0,
            c22: 1.0,
            c12: Complex64::new(0.0, 0.0),
        };
        assert_eq!(f1_statistic(&d), 4.0);
    }

    #[test]
    fn disjoint_tones_under_shifted_kernel() {
        let t_len = 4096;
        let amp = 2f64.sqrt();
        let s1: Vec<f64> = tone(t_len, 10.0, 0.3).iter().map(|v| amp * v).collect();
        let s2: Vec<f64> = tone(t_len, 100.0, 1.1).iter().map(|v| amp * v).collect();
        let s = TimeSeriesSet::new(vec![s1, s2]).unwrap();
        let kernel = KernelSpec::K3 {
            omega0: 2.0 * PI * 10.0 / t_len as f64,
        };
        let c = spectral_covariance(&dft(&s).unwrap(), &kernel).unwrap();
        assert!(c.c11 > c.c22);
        assert!(c.c12.norm() < 1e-10);
        // two-bin closed form: unit power at each tone, weighted by K(ω)
        let want_11 = kernel.weight(2.0 * PI * 10.0 / t_len as f64);
        let want_22 = kernel.weight(2.0 * PI * 100.0 / t_len as f64);
        assert!((c.c11 - want_11).abs() < 1e-10 && (c.c22 - want_22).abs() < 1e-10);
    }

    #[test]
    fn flat_kernel_is_trivial() {
        let t_len = 2048;
        let s = TimeSeriesSet::new(vec![tone(t_len, 10.0, 0.0), tone(t_len, 30.0, 0.0)]).unwrap();
        let z = crate::whitening::whiten(&s).unwrap().whitened;
        let c = spectral_covariance(&dft(&z).unwrap(), &Flat).unwrap();
        assert!((c.c11 - 1.0).abs() < 1e-8 && (c.c22 - 1.0).abs() < 1e-8 && c.c12.norm() < 1e-8);
        assert!(matches!(ftpca_fixed(&z, &Flat), Err(Error::TrivialKernel { .. })));
    }

    #[test]
    fn equal_spectra_are_trivial() {
        let t_len = 2048;
        let s = TimeSeriesSet::new(vec![tone(t_len, 40.0, 0.0), tone(t_len, 40.0, PI / 2.0)]).unwrap();
        let z = crate::whitening::whiten(&s).unwrap().whitened;
        assert!(matches!(
            ftpca_fixed(&z, &KernelSpec::K3 { omega0: 0.5 }),
            Err(Error::TrivialKernel { .. })
        ));
    }

    #[test]
    fn omega0_grid_reaches_pi() {
        let g = omega0_grid(0.001).unwrap();
        assert_eq!(g.len(), 3142);
        assert!(*g.last().unwrap() <= PI);
        assert!(omega0_grid(0.0).is_err());
    }
}
