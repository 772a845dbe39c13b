//! Step one: centering and PCA whitening.
//!
//! The sample covariance `C = (1/T)(x − μ)(x − μ)ᵀ` is eigendecomposed as
//! `U·diag(σ²)·Uᵀ`; the whitened signal is `z = diag(σ)⁻¹·Uᵀ·(x − μ)` and has
//! identity sample covariance. For `x = A·s` with standardized sources the
//! remaining unknown is a single orthonormal matrix between `s` and `z`.
//!
//! A badly conditioned covariance leaves `z` white only to about
//! `ε·cond(C)`. One symmetric pass `z ← C_z^{-1/2}·z` removes that residue
//! without rotating the result.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::signal::TimeSeriesSet;

/// Eigenvalues at or below this fraction of the largest mark the covariance
/// as rank deficient.
pub const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WhiteningResult {
    pub mean: Vec<f64>,
    /// Eigenvectors of the covariance, one per column, ordered like `scales`.
    pub rotation_u: Vec<Vec<f64>>,
    /// Square roots of the covariance eigenvalues, descending.
    pub scales: Vec<f64>,
    /// Near-identity symmetric correction applied after the PCA step.
    pub correction: Vec<Vec<f64>>,
    pub whitened: TimeSeriesSet,
}

impl WhiteningResult {
    /// The matrix `P·diag(σ)⁻¹·Uᵀ` applied after centering, `P` being
    /// [`correction`](Self::correction).
    pub fn whitening_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.scales.len();
        let pca: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.rotation_u[j][i] / self.scales[i]).collect())
            .collect();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.correction[i][k] * pca[k][j]).sum())
                    .collect()
            })
            .collect()
    }
}

pub fn whiten(x: &TimeSeriesSet) -> Result<WhiteningResult> {
    let n = x.n_channels();
    if n < 2 {
        return Err(Error::Arity(format!(
            "whitening needs at least 2 channels, got {n}"
        )));
    }
    let mean = x.means();
    let cov = x.covariance();
    let eig = linalg::sym_eigen(&cov);
    let largest = eig.values[0];
    if !(largest > 0.0) || eig.values[n - 1] <= DEGENERACY_RATIO * largest {
        return Err(Error::DegenerateInput(format!(
            "covariance eigenvalues {:?} are rank deficient",
            eig.values
        )));
    }
    let scales: Vec<f64> = eig.values.iter().map(|v| v.sqrt()).collect();
    let rotation_u = eig.vectors;

    let t_len = x.n_samples();
    let whitened: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut out = vec![0.0; t_len];
            for (j, ch) in x.channels().iter().enumerate() {
                let w = rotation_u[j][i] / scales[i];
                let m = mean[j];
                for (o, v) in out.iter_mut().zip(ch) {
                    *o += w * (v - m);
                }
            }
            out
        })
        .collect();
    let pca = TimeSeriesSet::new(whitened)?;
    let correction = inv_sqrt(&pca.covariance());
    let whitened = pca.transform(&correction)?;

    Ok(WhiteningResult {
        mean,
        rotation_u,
        scales,
        correction,
        whitened,
    })
}

/// `C^{-1/2}` of a positive definite symmetric matrix.
fn inv_sqrt(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let eig = linalg::sym_eigen(c);
    let n = c.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| eig.vectors[i][k] * eig.vectors[j][k] / eig.values[k].sqrt())
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Symmetric standardization `C^{-1/2}·(x − μ)`: zero mean, identity
/// covariance, and the smallest possible change to the channels. Used to
/// normalize generated sources without mixing them.
pub fn standardize(x: &TimeSeriesSet) -> Result<TimeSeriesSet> {
    // rejects rank-deficient input
    whiten(x)?;
    let means = x.means();
    let centered = TimeSeriesSet::new(
        x.channels()
            .iter()
            .zip(&means)
            .map(|(c, m)| c.iter().map(|v| v - m).collect())
            .collect(),
    )?;
    let once = centered.transform(&inv_sqrt(&centered.covariance()))?;
    once.transform(&inv_sqrt(&once.covariance()))
}

/// `y = R(θ)·z` for a two-channel set.
pub fn apply_rotation(z: &TimeSeriesSet, theta: f64) -> Result<TimeSeriesSet> {
    apply_mat2(z, &linalg::rotation(theta))
}

pub fn apply_mat2(z: &TimeSeriesSet, m: &Mat2) -> Result<TimeSeriesSet> {
    if z.n_channels() != 2 {
        return Err(Error::Arity(format!(
            "a 2x2 transform needs 2 channels, got {}",
            z.n_channels()
        )));
    }
    let (a, b) = (z.channel(0), z.channel(1));
    let y0 = a.iter().zip(b).map(|(p, q)| m[0][0] * p + m[0][1] * q).collect();
    let y1 = a.iter().zip(b).map(|(p, q)| m[1][0] * p + m[1][1] * q).collect();
    TimeSeriesSet::new(vec![y0, y1])
}
