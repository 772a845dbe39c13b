//! Step two by optimization: a brute-force scan over the rotation angle,
//! and the angle-error metric used to score every method.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::objectives::{Objective, Orientation};
use crate::separation::{Diagnostics, SeparationResult};
use crate::signal::TimeSeriesSet;
use crate::whitening::apply_rotation;

const MAX_GRID_POINTS: f64 = 1e6;

/// Half-open angle range `[start, stop)` in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AngleGrid {
    /// −90°..90° at 0.1°: one full period of every objective.
    fn default() -> Self {
        Self {
            start: -90.0,
            stop: 90.0,
            step: 0.1,
        }
    }
}

impl AngleGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let g = Self { start, stop, step };
        g.validate()?;
        Ok(g)
    }

    /// −180°..180° at 0.1°.
    pub fn full_circle() -> Self {
        Self {
            start: -180.0,
            stop: 180.0,
            step: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "angle grid needs finite bounds and a positive step, got {self:?}"
            )));
        }
        if !(self.start < self.stop) {
            return Err(Error::InvalidParameter(format!(
                "angle grid start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if (self.stop - self.start) / self.step > MAX_GRID_POINTS {
            return Err(Error::InvalidParameter("angle grid exceeds 10^6 points".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        // tolerate representation error in (stop − start)/step
        let raw = (self.stop - self.start) / self.step;
        let n = (raw - 1e-9).ceil();
        n.max(1.0) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.start + k as f64 * self.step)
            .collect()
    }
}

/// Objective values along a grid, with the extremum per orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveCurve {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    pub orientation: Orientation,
    pub best_angle: f64,
    pub best_value: f64,
}

impl ObjectiveCurve {
    fn from_values(angles: Vec<f64>, values: Vec<f64>, orientation: Orientation) -> Self {
        let mut best = 0;
        for (i, &v) in values.iter().enumerate().skip(1) {
            if orientation.improves(v, values[best]) {
                best = i;
            }
        }
        Self {
            best_angle: angles[best],
            best_value: values[best],
            angles,
            values,
            orientation,
        }
    }
}

/// Evaluates `objective(R(θ)·z)` at every grid angle. Evaluation runs in
/// parallel; the curve is always in grid order and ties go to the first
/// grid point.
pub fn brute_force_search<O: Objective + ?Sized>(
    z: &TimeSeriesSet,
    objective: &O,
    grid: &AngleGrid,
) -> Result<ObjectiveCurve> {
    grid.validate()?;
    if z.n_channels() != 2 {
        return Err(Error::Arity(format!(
            "rotation search needs 2 channels, got {}",
            z.n_channels()
        )));
    }
    let angles = grid.angles();
    let evaluated: Vec<Result<(f64, Orientation)>> = angles
        .par_iter()
        .map(|&deg| {
            let y = apply_rotation(z, deg.to_radians())?;
            objective
                .evaluate(&y)
                .map(|v| (v.value, v.orientation))
                .map_err(|e| Error::AtAngle {
                    angle_deg: deg,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut values = Vec::with_capacity(angles.len());
    let mut orientation = Orientation::Minimize;
    for r in evaluated {
        let (v, o) = r?;
        orientation = o;
        values.push(v);
    }
    Ok(ObjectiveCurve::from_values(angles, values, orientation))
}

/// Brute-force search packaged as a separation: the unmixing matrix is
/// `R(best_angle)`.
pub fn separate_by_search<O: Objective + ?Sized>(
    z: &TimeSeriesSet,
    objective: &O,
    grid: &AngleGrid,
) -> Result<SeparationResult> {
    let curve = brute_force_search(z, objective, grid)?;
    let unmixing = linalg::rotation(curve.best_angle.to_radians());
    SeparationResult::new(z, unmixing, Diagnostics::Curve(curve))
}

/// Distance in degrees between two rotation angles modulo the separation
/// ambiguities: channel swaps and sign flips (θ ~ θ + k·90°) and the
/// reflection branch θ ~ −θ. The result lies in `[0, 45]`.
pub fn angle_error(theta_est: f64, theta_true: f64) -> f64 {
    [theta_true, -theta_true]
        .iter()
        .map(|t| {
            let d = (theta_est - t).rem_euclid(90.0);
            d.min(90.0 - d)
        })
        .fold(f64::INFINITY, f64::min)
}
