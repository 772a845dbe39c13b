//! The common result of every step-two method.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::search::ObjectiveCurve;
use crate::signal::TimeSeriesSet;
use crate::whitening::apply_mat2;

/// Relative eigenvalue gap below which an eigendecomposition-based rotation
/// is considered undetermined.
pub const RELATIVE_GAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Diagnostics {
    /// Eigendecomposition of a 2×2 second-order statistic.
    Eigen {
        eigenvalues: [f64; 2],
        gap: f64,
        /// `|Im Z₁₂|` for spectral methods; the part of the statistic that
        /// a real rotation cannot explain.
        imaginary_residual: Option<f64>,
    },
    /// Objective curve from a rotation search.
    Curve(ObjectiveCurve),
}

#[derive(Debug, Clone)]
pub struct SeparationResult {
    /// Rotation angle of the unmixing matrix, degrees.
    pub theta_deg: f64,
    /// Orthonormal unmixing matrix applied to the whitened signals.
    pub unmixing: Mat2,
    pub sources: TimeSeriesSet,
    pub diagnostics: Diagnostics,
}

impl SeparationResult {
    pub(crate) fn new(z: &TimeSeriesSet, unmixing: Mat2, diagnostics: Diagnostics) -> Result<Self> {
        Ok(Self {
            theta_deg: linalg::rotation_angle_deg(&unmixing),
            unmixing,
            sources: apply_mat2(z, &unmixing)?,
            diagnostics,
        })
    }

    /// Separation from the eigendecomposition `M = E·Λ·Eᵀ` of a symmetric
    /// 2×2 statistic of `z`: the unmixing matrix is `Eᵀ`. A gap below
    /// `min_gap` is reported through `degenerate`.
    pub(crate) fn from_symmetric(
        z: &TimeSeriesSet,
        m: &Mat2,
        imaginary_residual: Option<f64>,
        min_gap: f64,
        degenerate: impl FnOnce(f64, f64) -> Error,
    ) -> Result<Self> {
        let (values, e) = linalg::sym_eigen2(m);
        let gap = values[0] - values[1];
        let threshold = min_gap.max(RELATIVE_GAP_TOLERANCE * (values[0].abs() + values[1].abs()));
        if !(gap > threshold) {
            return Err(degenerate(gap, threshold));
        }
        Self::new(
            z,
            linalg::transpose(&e),
            Diagnostics::Eigen {
                eigenvalues: values,
                gap,
                imaginary_residual,
            },
        )
    }

    /// One-line summary for logs and CLI comment lines.
    pub fn summary(&self) -> String {
        match &self.diagnostics {
            Diagnostics::Eigen {
                eigenvalues,
                gap,
                imaginary_residual,
            } => {
                let mut s = format!(
                    "theta_deg={:.6},lambda1={:.9e},lambda2={:.9e},gap={:.9e}",
                    self.theta_deg, eigenvalues[0], eigenvalues[1], gap
                );
                if let Some(r) = imaginary_residual {
                    s.push_str(&format!(",imag_residual={r:.9e}"));
                }
                s
            }
            Diagnostics::Curve(c) => format!(
                "theta_deg={:.6},best_value={:.9e},grid_points={}",
                self.theta_deg,
                c.best_value,
                c.angles.len()
            ),
        }
    }
}
