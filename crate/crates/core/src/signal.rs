//! Multichannel sampled signals and the discrete calculus shared by every
//! objective and covariance in the crate.
//!
//! Time is the sample index (dt = 1). Derivatives use central differences in
//! the interior and one-sided differences at the two endpoints, so a
//! derivative has the same length as its source. Any fixed linear stencil
//! commutes with a constant matrix applied across channels, which is what
//! lets `derivative(R·z) = R·derivative(z)` hold sample by sample.

use crate::error::{Error, Result};

/// Minimum number of samples for a signal set.
pub const MIN_SAMPLES: usize = 3;

/// N channels of T uniformly sampled, finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSet {
    channels: Vec<Vec<f64>>,
}

impl TimeSeriesSet {
    /// Builds a set from per-channel sample vectors.
    pub fn new(channels: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Shape("a signal set needs at least one channel".into()));
        }
        let len = channels[0].len();
        if let Some((i, c)) = channels.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(Error::Shape(format!(
                "channel {i} has {} samples, channel 0 has {len}",
                c.len()
            )));
        }
        if len < MIN_SAMPLES {
            return Err(Error::TooShort {
                needed: MIN_SAMPLES,
                got: len,
            });
        }
        for (ch, c) in channels.iter().enumerate() {
            if let Some(t) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    channel: ch,
                    sample: t,
                });
            }
        }
        Ok(Self { channels })
    }

    /// Builds a set from rows of samples (one row per time step).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        let mut channels = vec![Vec::with_capacity(rows.len()); n];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "row {r} has {} fields, expected {n}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                channels[c].push(v);
            }
        }
        Self::new(channels)
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].len()
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Applies a constant N×N matrix across channels: `out[i][t] = Σ_j m[i][j]·x[j][t]`.
    pub fn transform(&self, m: &[Vec<f64>]) -> Result<Self> {
        let n = self.n_channels();
        if m.len() != n || m.iter().any(|row| row.len() != n) {
            return Err(Error::Arity(format!(
                "matrix must be {n}x{n} to act on {n} channels"
            )));
        }
        let t_len = self.n_samples();
        let out = m
            .iter()
            .map(|row| {
                let mut acc = vec![0.0; t_len];
                for (w, ch) in row.iter().zip(&self.channels) {
                    if *w == 0.0 {
                        continue;
                    }
                    for (a, x) in acc.iter_mut().zip(ch) {
                        *a += w * x;
                    }
                }
                acc
            })
            .collect();
        Self::new(out)
    }

    /// Sample means per channel.
    pub fn means(&self) -> Vec<f64> {
        let t = self.n_samples() as f64;
        self.channels.iter().map(|c| c.iter().sum::<f64>() / t).collect()
    }

    /// Sample covariance `(1/T)·(x − mean)(x − mean)ᵀ`.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let means = self.means();
        let centered: Vec<Vec<f64>> = self
            .channels
            .iter()
            .zip(&means)
            .map(|(c, m)| c.iter().map(|v| v - m).collect())
            .collect();
        cross_moment(&centered, &centered)
    }

    /// Swaps channel order (test and diagnostic helper).
    pub fn reversed_channels(&self) -> Self {
        let mut c = self.channels.clone();
        c.reverse();
        Self { channels: c }
    }
}

/// `(1/T)·a·bᵀ` for equally long channel lists.
pub fn cross_moment(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = a[0].len() as f64;
    a.iter()
        .map(|ai| {
            b.iter()
                .map(|bj| ai.iter().zip(bj).map(|(x, y)| x * y).sum::<f64>() / t)
                .collect()
        })
        .collect()
}

/// Per-sample derivative estimates, same shape as the source set.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSet {
    channels: Vec<Vec<f64>>,
}

impl DerivativeSet {
    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].len()
    }
}

/// Finite-difference derivative of every channel.
pub fn derivative(x: &TimeSeriesSet) -> DerivativeSet {
    DerivativeSet {
        channels: x.channels().iter().map(|c| derivative_of(c)).collect(),
    }
}

/// Derivative of a single channel. Requires at least [`MIN_SAMPLES`] values.
pub fn derivative_of(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= MIN_SAMPLES, "derivative needs at least {MIN_SAMPLES} samples");
    let mut d = Vec::with_capacity(n);
    d.push(x[1] - x[0]);
    d.extend(x.windows(3).map(|w| (w[2] - w[0]) / 2.0));
    d.push(x[n - 1] - x[n - 2]);
    d
}

/// Checked variant of [`derivative_of`].
pub fn try_derivative_of(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < MIN_SAMPLES {
        return Err(Error::TooShort {
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    Ok(derivative_of(x))
}

/// Riemann sum with dt = 1 sample.
pub fn integral(f: &[f64]) -> f64 {
    f.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_ramp() {
        assert_eq!(derivative_of(&[5.0, 5.0, 5.0, 5.0]), vec![0.0; 4]);
        assert_eq!(derivative_of(&[0.0, 1.0, 2.0, 3.0]), vec![1.0; 4]);
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            try_derivative_of(&[1.0, 2.0]),
            Err(Error::TooShort { needed: 3, got: 2 })
        ));
        assert!(matches!(
            TimeSeriesSet::new(vec![vec![0.0, 1.0]]),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn sine_within_taylor_bound() {
        let w = 2.0 * std::f64::consts::PI / 64.0;
        let x: Vec<f64> = (0..256).map(|t| (w * t as f64).sin()).collect();
        let d = derivative_of(&x);
        // |sin(w)/w − 1|·w ≤ w³/6 bounds the central-difference error
        let bound = w.powi(3) / 6.0;
        let worst = (1..255)
            .map(|t| (d[t] - w * (w * t as f64).cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < bound, "{worst} >= {bound}");
    }

    #[test]
    fn integral_examples() {
        assert_eq!(integral(&[1.0; 100]), 100.0);
        assert_eq!(integral(&[0.0; 7]), 0.0);
        assert_eq!(integral(&[0.0, 1.0, 2.0, 3.0, 4.0]), 10.0);
    }

    #[test]
    fn ragged_and_nonfinite_rejected() {
        assert!(matches!(
            TimeSeriesSet::new(vec![vec![0.0; 4], vec![0.0; 3]]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            TimeSeriesSet::new(vec![vec![0.0, f64::NAN, 1.0]]),
            Err(Error::NonFinite {
                channel: 0,
                sample: 1
            })
        ));
    }

    proptest! {
        #[test]
        fn derivative_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            x in prop::collection::vec(-10.0f64..10.0, 8),
            y in prop::collection::vec(-10.0f64..10.0, 8),
        ) {
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = derivative_of(&combo);
            let dx = derivative_of(&x);
            let dy = derivative_of(&y);
            for t in 0..8 {
                prop_assert!((lhs[t] - (a * dx[t] + b * dy[t])).abs() < 1e-10);
            }
        }

        #[test]
        fn derivative_commutes_with_mixing(
            m in prop::collection::vec(-2.0f64..2.0, 4),
            x in prop::collection::vec(-5.0f64..5.0, 12),
        ) {
            let set = TimeSeriesSet::new(vec![x[..6].to_vec(), x[6..].to_vec()]).unwrap();
            let mat = vec![vec![m[0], m[1]], vec![m[2], m[3]]];
            let lhs = derivative(&set.transform(&mat).unwrap());
            let d = derivative(&set);
            for i in 0..2 {
                for t in 0..6 {
                    let rhs = mat[i][0] * d.channel(0)[t] + mat[i][1] * d.channel(1)[t];
                    prop_assert!((lhs.channel(i)[t] - rhs).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn integral_of_concatenation(
            a in prop::collection::vec(-1e3f64..1e3, 0..20),
            b in prop::collection::vec(-1e3f64..1e3, 0..20),
        ) {
            let mut ab = a.clone();
            ab.extend_from_slice(&b);
            prop_assert!((integral(&ab) - (integral(&a) + integral(&b))).abs() < 1e-8);
        }
    }
}
