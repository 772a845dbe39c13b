//! AMUSE and SOBI: second-order baselines built on lagged covariances.
//!
//! For whitened `z = R̂ᵀ·s` every symmetrized lagged covariance is
//! `R̂ᵀ·diag(ρ₁(τ), ρ₂(τ))·R̂`. AMUSE diagonalizes one lag; SOBI finds the
//! rotation that best diagonalizes a family of lags at once. In two
//! dimensions the off-diagonal of `R(θ)ᵀ·M·R(θ)` is
//!
//! ```text
//! off(θ) = v·cos 2θ − u·sin 2θ,   u = (M₀₀ − M₁₁)/2,  v = M₀₁
//! ```
//!
//! so `Σ_τ off_τ(θ)²` is a quadratic form in `(cos 2θ, sin 2θ)` and its
//! minimizer is the eigenvector of the smallest eigenvalue of
//! `G = Σ_τ [[v², −uv], [−uv, u²]]`.
//!
//! Both methods also refuse lags whose structure is indistinguishable from
//! white noise: for whitened white noise `T·gap²/2` is asymptotically χ²
//! with 2 degrees of freedom per lag.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::separation::{Diagnostics, SeparationResult, RELATIVE_GAP_TOLERANCE};
use crate::signal::TimeSeriesSet;

/// Tail probability of the white-noise test.
pub const WHITE_NOISE_LEVEL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagSet {
    lags: Vec<usize>,
}

impl LagSet {
    pub fn new(lags: Vec<usize>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidParameter("lag set is empty".into()));
        }
        if lags.contains(&0) {
            return Err(Error::InvalidParameter("lags must be positive".into()));
        }
        let mut sorted = lags.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("lags must be distinct, got {lags:?}")));
        }
        Ok(Self { lags })
    }

    /// `{1, …, n}`.
    pub fn first(n: usize) -> Result<Self> {
        Self::new((1..=n).collect())
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }

    /// Every lag must stay below `T/4` so each estimate averages enough
    /// products.
    pub fn check_length(&self, t_len: usize) -> Result<()> {
        match self.lags.iter().find(|&&l| 4 * l >= t_len) {
            Some(l) => Err(Error::Range(format!(
                "lag {l} is not below T/4 for T = {t_len}"
            ))),
            None => Ok(()),
        }
    }
}

impl Default for LagSet {
    fn default() -> Self {
        Self {
            lags: (1..=10).collect(),
        }
    }
}

impl std::str::FromStr for LagSet {
    type Err = Error;

    /// Comma list of lags, or `a..b` for the inclusive range.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse lag set {s:?}"));
        if let Some((a, b)) = s.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            return Self::new((a..=b).collect());
        }
        let lags = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(lags)
    }
}

fn require_pair(z: &TimeSeriesSet) -> Result<()> {
    if z.n_channels() != 2 {
        return Err(Error::Arity(format!(
            "lagged-covariance methods need 2 channels, got {}",
            z.n_channels()
        )));
    }
    Ok(())
}

/// `½(M + Mᵀ)` with `M_ij = (1/(T−τ))·Σ_t z_i[t+τ]·z_j[t]`.
pub fn lagged_covariance(z: &TimeSeriesSet, tau: usize) -> Result<Mat2> {
    require_pair(z)?;
    let t_len = z.n_samples();
    if tau >= t_len {
        return Err(Error::Range(format!("lag {tau} must be below T = {t_len}")));
    }
    let n = (t_len - tau) as f64;
    let lagged = |i: usize, j: usize| {
        let (a, b) = (z.channel(i), z.channel(j));
        a[tau..].iter().zip(b).map(|(p, q)| p * q).sum::<f64>() / n
    };
    let off = 0.5 * (lagged(0, 1) + lagged(1, 0));
    Ok([[lagged(0, 0), off], [off, lagged(1, 1)]])
}

fn white_noise_floor(t_len: usize, n_lags: usize) -> f64 {
    let dof = 2.0 * n_lags as f64;
    ChiSquared::new(dof)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - WHITE_NOISE_LEVEL)
        / t_len as f64
}

/// `Σ_τ gap_τ²/2`, compared against the white-noise floor.
fn lag_structure(ms: &[Mat2]) -> f64 {
    ms.iter()
        .map(|m| {
            let u = 0.5 * (m[0][0] - m[1][1]);
            2.0 * (u * u + m[0][1] * m[0][1])
        })
        .sum()
}

fn trivial_lag(what: String) -> Error {
    Error::TrivialLag(what)
}

/// AMUSE: eigendecomposition of one symmetrized lagged covariance.
pub fn amuse(z: &TimeSeriesSet, tau: usize) -> Result<SeparationResult> {
    let lags = LagSet::new(vec![tau])?;
    lags.check_length(z.n_samples())?;
    let m = lagged_covariance(z, tau)?;
    let structure = lag_structure(&[m]);
    let floor = white_noise_floor(z.n_samples(), 1);
    if !(structure > floor) {
        return Err(trivial_lag(format!(
            "lag {tau} eigenvalue gap {:.3e} is within white-noise level {:.3e}",
            (2.0 * structure).sqrt(),
            (2.0 * floor).sqrt()
        )));
    }
    SeparationResult::from_symmetric(z, &m, None, 0.0, |gap, threshold| {
        trivial_lag(format!("lag {tau} eigenvalue gap {gap:.3e} below {threshold:.3e}"))
    })
}

/// `Σ_τ off-diagonal(R(θ)ᵀ·M_τ·R(θ))²`.
pub fn joint_offdiagonal(ms: &[Mat2], theta_deg: f64) -> f64 {
    let (s, c) = (2.0 * theta_deg.to_radians()).sin_cos();
    ms.iter()
        .map(|m| {
            let u = 0.5 * (m[0][0] - m[1][1]);
            let off = m[0][1] * c - u * s;
            off * off
        })
        .sum()
}

/// Rotation angle minimizing [`joint_offdiagonal`], with the eigenvalues of
/// the aggregated Givens statistic `G`. Degenerate when `G` is isotropic.
pub fn joint_diagonalizer(ms: &[Mat2]) -> (f64, [f64; 2]) {
    let mut g = [[0.0; 2]; 2];
    for m in ms {
        let u = 0.5 * (m[0][0] - m[1][1]);
        let v = m[0][1];
        g[0][0] += v * v;
        g[0][1] -= u * v;
        g[1][1] += u * u;
    }
    g[1][0] = g[0][1];
    let (values, vectors) = linalg::sym_eigen2(&g);
    let q = [vectors[0][1], vectors[1][1]];
    (0.5 * q[1].atan2(q[0]).to_degrees(), values)
}

/// SOBI: closed-form joint diagonalization of the symmetrized lagged
/// covariances over `lags`.
pub fn sobi(z: &TimeSeriesSet, lags: &LagSet) -> Result<SeparationResult> {
    require_pair(z)?;
    lags.check_length(z.n_samples())?;
    let ms = lags
        .lags()
        .par_iter()
        .map(|&tau| lagged_covariance(z, tau))
        .collect::<Result<Vec<_>>>()?;

    let structure = lag_structure(&ms);
    let floor = white_noise_floor(z.n_samples(), lags.len());
    if !(structure > floor) {
        return Err(trivial_lag(format!(
            "lags {:?} carry no structure above white noise ({structure:.3e} <= {floor:.3e})",
            lags.lags()
        )));
    }
    let (theta_deg, g_values) = joint_diagonalizer(&ms);
    let gap = g_values[0] - g_values[1];
    let threshold = RELATIVE_GAP_TOLERANCE * (g_values[0].abs() + g_values[1].abs());
    if !(gap > threshold) {
        return Err(trivial_lag(format!(
            "joint diagonalization statistic is isotropic (gap {gap:.3e})"
        )));
    }
    let unmixing = linalg::transpose(&linalg::rotation(theta_deg.to_radians()));
    // eigenvalues of the lag-averaged statistic in the chosen basis
    let mut mean = [[0.0; 2]; 2];
    for m in &ms {
        for i in 0..2 {
            for j in 0..2 {
                mean[i][j] += m[i][j] / ms.len() as f64;
            }
        }
    }
    let e = linalg::rotation(theta_deg.to_radians());
    let d = linalg::matmul(&linalg::matmul(&unmixing, &mean), &e);
    SeparationResult::new(
        z,
        unmixing,
        Diagnostics::Eigen {
            eigenvalues: [d[0][0], d[1][1]],
            gap: (d[0][0] - d[1][1]).abs(),
            imaginary_residual: None,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lagged_covariance_of_quadrature_pair() {
        let t_len = 1000;
        let w = 2.0 * PI * 7.0 / t_len as f64;
        let a = (0..t_len).map(|t| (w * t as f64).sin()).collect();
        let b = (0..t_len).map(|t| (w * t as f64).cos()).collect();
        let z = TimeSeriesSet::new(vec![a, b]).unwrap();
        let m = lagged_covariance(&z, 0).unwrap();
        assert!((m[0][0] - 0.5).abs() < 1e-12 && (m[1][1] - 0.5).abs() < 1e-12);
        assert!(m[0][1].abs() < 1e-12);
        let m = lagged_covariance(&z, 3).unwrap();
        assert_eq!(m[0][1], m[1][0]);
        assert!(matches!(lagged_covariance(&z, 1000), Err(Error::Range(_))));
    }

    #[test]
    fn lag_sets() {
        assert_eq!(LagSet::default().lags(), &(1..=10).collect::<Vec<_>>()[..]);
        assert_eq!("1..3".parse::<LagSet>().unwrap().lags(), &[1, 2, 3]);
        assert_eq!("5, 2".parse::<LagSet>().unwrap().lags(), &[5, 2]);
        assert!("1,1".parse::<LagSet>().is_err());
        assert!("0".parse::<LagSet>().is_err());
        assert!("x".parse::<LagSet>().is_err());
        assert!(LagSet::first(10).unwrap().check_length(40).is_err());
        assert!(LagSet::first(10).unwrap().check_length(41).is_ok());
    }

    #[test]
    fn single_lag_floor_matches_closed_form() {
        // χ² with 2 dof: quantile(1 − p) = −2 ln p
        let t_len = 10_000;
        let want = -2.0 * WHITE_NOISE_LEVEL.ln() / t_len as f64;
        assert!((white_noise_floor(t_len, 1) - want).abs() < 1e-9 * want);
    }

    #[test]
    fn diagonalizer_recovers_a_rotation() {
        let theta = 23.0f64;
        let r = linalg::rotation(theta.to_radians());
        let ms: Vec<Mat2> = [(0.9, 0.2), (0.81, 0.04), (0.5, -0.3)]
            .iter()
            .map(|&(a, b)| linalg::matmul(&linalg::matmul(&r, &[[a, 0.0], [0.0, b]]), &linalg::transpose(&r)))
            .collect();
        let (est, _) = joint_diagonalizer(&ms);
        assert!(crate::search::angle_error(est, theta) < 1e-9);
        assert!(joint_offdiagonal(&ms, est) < 1e-20);
    }

    #[test]
    fn zero_signals_are_trivial() {
        let zeros = TimeSeriesSet::new(vec![vec![0.0; 64]; 2]).unwrap();
        assert!(matches!(sobi(&zeros, &LagSet::first(3).unwrap()), Err(Error::TrivialLag(_))));
        assert!(matches!(amuse(&zeros, 2), Err(Error::TrivialLag(_))));
    }
}
