#![allow(dead_code)]

use arcsep::harness::{generate_sources, SourceKind, SourceSpec};
use arcsep::linalg;
use arcsep::whitening::whiten;
use arcsep::TimeSeriesSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_set(seed: u64, n: usize, t_len: usize) -> TimeSeriesSet {
    let mut r = rng(seed);
    TimeSeriesSet::new(
        (0..n)
            .map(|_| (0..t_len).map(|_| r.sample(StandardNormal)).collect())
            .collect(),
    )
    .unwrap()
}

pub fn sources(a: &str, b: &str, t_len: usize, seed: u64) -> TimeSeriesSet {
    let pair = [
        SourceSpec::new(a.parse::<SourceKind>().unwrap(), seed),
        SourceSpec::new(b.parse::<SourceKind>().unwrap(), seed.wrapping_add(1000)),
    ];
    generate_sources(&pair, t_len).unwrap()
}

/// Standardized sources rotated by `theta_deg`: `z = R(θ)ᵀ·s`, so the
/// separating rotation is `R(θ)`.
pub fn rotated(s: &TimeSeriesSet, theta_deg: f64) -> TimeSeriesSet {
    let r = linalg::rotation(theta_deg.to_radians());
    s.transform(&linalg::to_rows(&linalg::transpose(&r))).unwrap()
}

/// Whitened mixture `whiten(A·s)` for a fixed well-conditioned `A`.
pub fn mixed(s: &TimeSeriesSet) -> TimeSeriesSet {
    whiten(&s.transform(&[vec![1.0, 0.6], vec![-0.4, 1.3]]).unwrap())
        .unwrap()
        .whitened
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
