//! Scalar objectives evaluated on candidate unmixed signals `y`.
//!
//! Geometrical objectives are built from the per-sample derivatives `y'`:
//!
//! | kind      | value                                                        |
//! |-----------|--------------------------------------------------------------|
//! | `O1`      | `Σ_t √N·Π_i (1/N + y_i'²)^{1/(2N)} / √(1 + Σ_i y_i'²)`        |
//! | `O2`      | `Σ_t Π_i √(1 + y_i'²)`                                         |
//! | `O3`      | `Σ_t Π_i |y_i'|`                                               |
//! | `O4`      | `Σ_t Σ_i log max(|y_i'|, 1e-8)`                                |
//! | `O5`      | `Σ_i Σ_t √(1 + y_i'²)`                                         |
//! | `O3Tilde` | `|Σ_t y_1'·y_2'|`                                              |
//!
//! `MI` is the sum of histogram estimates of the marginal differential
//! entropies. `G1`–`G3` are negentropy surrogates
//! `Σ_i (mean_t G(y_i) − E[G(ν)])²` with `ν ~ N(0, 1)`, to be maximized.
//! Everything else is minimized.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::signal::{derivative, integral, TimeSeriesSet};

/// Floor applied to `|y'|` before taking logarithms in `O4`.
pub const O4_CLAMP: f64 = 1e-8;

pub const MIN_HISTOGRAM_BINS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Minimize,
    Maximize,
}

impl Orientation {
    /// True when `candidate` is strictly better than `incumbent`.
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Orientation::Minimize => candidate < incumbent,
            Orientation::Maximize => candidate > incumbent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub orientation: Orientation,
}

/// Anything that scores a candidate unmixed signal set.
pub trait Objective: Sync {
    fn evaluate(&self, y: &TimeSeriesSet) -> Result<ObjectiveValue>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    O1,
    O2,
    O3,
    O4,
    O5,
    O3Tilde,
    /// Sum of marginal entropies; `None` picks the bin count from `T`.
    Mi { bins: Option<usize> },
    G1 { a1: f64 },
    G2 { a2: f64 },
    G3,
}

impl ObjectiveKind {
    pub const ALL_NAMES: [&'static str; 10] =
        ["o1", "o2", "o3", "o4", "o5", "o3tilde", "mi", "g1", "g2", "g3"];

    pub fn validate(&self) -> Result<()> {
        match *self {
            ObjectiveKind::G1 { a1 } if !(1.0..=2.0).contains(&a1) => Err(
                Error::InvalidParameter(format!("G1 needs a1 in [1, 2], got {a1}")),
            ),
            ObjectiveKind::G2 { a2 } if !(a2 > 0.0 && a2.is_finite()) => Err(
                Error::InvalidParameter(format!("G2 needs a2 > 0, got {a2}")),
            ),
            ObjectiveKind::Mi { bins: Some(b) } if b < MIN_HISTOGRAM_BINS => Err(
                Error::InvalidParameter(format!(
                    "MI needs at least {MIN_HISTOGRAM_BINS} histogram bins, got {b}"
                )),
            ),
            _ => Ok(()),
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self {
            ObjectiveKind::G1 { .. } | ObjectiveKind::G2 { .. } | ObjectiveKind::G3 => {
                Orientation::Maximize
            }
            _ => Orientation::Minimize,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::O1 => "o1",
            ObjectiveKind::O2 => "o2",
            ObjectiveKind::O3 => "o3",
            ObjectiveKind::O4 => "o4",
            ObjectiveKind::O5 => "o5",
            ObjectiveKind::O3Tilde => "o3tilde",
            ObjectiveKind::Mi { .. } => "mi",
            ObjectiveKind::G1 { .. } => "g1",
            ObjectiveKind::G2 { .. } => "g2",
            ObjectiveKind::G3 => "g3",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "o1" => ObjectiveKind::O1,
            "o2" => ObjectiveKind::O2,
            "o3" => ObjectiveKind::O3,
            "o4" => ObjectiveKind::O4,
            "o5" => ObjectiveKind::O5,
            "o3tilde" | "o3~" => ObjectiveKind::O3Tilde,
            "mi" => ObjectiveKind::Mi { bins: None },
            "g1" => ObjectiveKind::G1 { a1: 1.0 },
            "g2" => ObjectiveKind::G2 { a2: 1.0 },
            "g3" => ObjectiveKind::G3,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown objective {other:?}; expected one of {}",
                    Self::ALL_NAMES.join(", ")
                )))
            }
        })
    }
}

impl Objective for ObjectiveKind {
    fn evaluate(&self, y: &TimeSeriesSet) -> Result<ObjectiveValue> {
        eval_objective(*self, y)
    }
}

pub fn eval_objective(kind: ObjectiveKind, y: &TimeSeriesSet) -> Result<ObjectiveValue> {
    kind.validate()?;
    let n = y.n_channels();
    let needs_pair = matches!(
        kind,
        ObjectiveKind::O1 | ObjectiveKind::O2 | ObjectiveKind::O3 | ObjectiveKind::O4
    );
    if needs_pair && n < 2 {
        return Err(Error::Arity(format!("{kind} needs at least 2 channels, got {n}")));
    }
    if kind == ObjectiveKind::O3Tilde && n != 2 {
        return Err(Error::Arity(format!("o3tilde needs exactly 2 channels, got {n}")));
    }

    let value = match kind {
        ObjectiveKind::Mi { bins } => {
            let bins = bins.unwrap_or_else(|| default_bins(y.n_samples()));
            y.channels()
                .iter()
                .map(|c| marginal_entropy(c, bins))
                .sum::<Result<f64>>()?
        }
        ObjectiveKind::G1 { .. } | ObjectiveKind::G2 { .. } | ObjectiveKind::G3 => {
            let reference = gaussian_expectation(kind);
            y.channels()
                .iter()
                .map(|c| {
                    let m = c.iter().map(|&v| contrast(kind, v)).sum::<f64>() / c.len() as f64;
                    (m - reference).powi(2)
                })
                .sum()
        }
        _ => geometric(kind, y),
    };
    if !value.is_finite() {
        return Err(Error::Evaluation(format!("{kind} evaluated to {value}")));
    }
    Ok(ObjectiveValue {
        value,
        orientation: kind.orientation(),
    })
}

fn geometric(kind: ObjectiveKind, y: &TimeSeriesSet) -> f64 {
    let d = derivative(y);
    let n = d.n_channels();
    let t_len = d.n_samples();
    let ch = d.channels();
    let per_sample = |f: &dyn Fn(usize) -> f64| -> f64 { (0..t_len).map(f).sum() };
    match kind {
        ObjectiveKind::O1 => {
            let nf = n as f64;
            let inv_n = 1.0 / nf;
            let exponent = 1.0 / (2.0 * nf);
            per_sample(&|t| {
                let mut prod = 1.0;
                let mut sq = 0.0;
                for c in ch {
                    let v = c[t] * c[t];
                    prod *= (inv_n + v).powf(exponent);
                    sq += v;
                }
                nf.sqrt() * prod / (1.0 + sq).sqrt()
            })
        }
        ObjectiveKind::O2 => per_sample(&|t| ch.iter().map(|c| (1.0 + c[t] * c[t]).sqrt()).product()),
        ObjectiveKind::O3 => per_sample(&|t| ch.iter().map(|c| c[t].abs()).product()),
        ObjectiveKind::O4 => per_sample(&|t| ch.iter().map(|c| c[t].abs().max(O4_CLAMP).ln()).sum()),
        ObjectiveKind::O5 => ch
            .iter()
            .map(|c| c.iter().map(|v| (1.0 + v * v).sqrt()).sum::<f64>())
            .sum(),
        ObjectiveKind::O3Tilde => o3_tilde_raw_from(&ch[0], &ch[1]).abs(),
        _ => unreachable!("not a geometrical objective"),
    }
}

/// Signed `Σ_t y_1'·y_2'` (flips sign under a 90° rotation).
pub fn o3_tilde_raw(y: &TimeSeriesSet) -> Result<f64> {
    if y.n_channels() != 2 {
        return Err(Error::Arity(format!(
            "o3tilde needs exactly 2 channels, got {}",
            y.n_channels()
        )));
    }
    let d = derivative(y);
    Ok(o3_tilde_raw_from(d.channel(0), d.channel(1)))
}

fn o3_tilde_raw_from(a: &[f64], b: &[f64]) -> f64 {
    let prod: Vec<f64> = a.iter().zip(b).map(|(p, q)| p * q).collect();
    integral(&prod)
}

/// 256 bins from 10⁴ samples up, otherwise ⌈√T⌉ (at least 8).
pub fn default_bins(t_len: usize) -> usize {
    if t_len >= 10_000 {
        256
    } else {
        ((t_len as f64).sqrt().ceil() as usize).max(MIN_HISTOGRAM_BINS)
    }
}

/// Histogram estimate of differential entropy over `[min, max]` with
/// `bins` equal-width cells: `−Σ p_k log p_k + log(width)`.
pub fn marginal_entropy(channel: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 || channel.len() < bins {
        return Err(Error::InvalidParameter(format!(
            "entropy estimate needs at least as many samples ({}) as bins ({bins})",
            channel.len()
        )));
    }
    let (lo, hi) = channel
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Evaluation("non-finite sample in entropy estimate".into()));
    }
    let span = hi - lo;
    if span <= 0.0 {
        return Err(Error::DegenerateEntropy);
    }
    let mut counts = vec![0usize; bins];
    let scale = bins as f64 / span;
    for &v in channel {
        let k = (((v - lo) * scale) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = channel.len() as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    Ok(h + (span / bins as f64).ln())
}

fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn contrast(kind: ObjectiveKind, y: f64) -> f64 {
    match kind {
        ObjectiveKind::G1 { a1 } => log_cosh(a1 * y) / a1,
        ObjectiveKind::G2 { a2 } => -(-a2 * y * y / 2.0).exp() / a2,
        ObjectiveKind::G3 => y.powi(4) / 4.0,
        _ => unreachable!("not a contrast function"),
    }
}

/// `E[G(ν)]` for a standard normal `ν`.
pub fn gaussian_expectation(kind: ObjectiveKind) -> f64 {
    match kind {
        ObjectiveKind::G1 { .. } => gauss_simpson(|x| contrast(kind, x)),
        ObjectiveKind::G2 { a2 } => -1.0 / (a2 * (1.0 + a2).sqrt()),
        ObjectiveKind::G3 => 0.75,
        _ => unreachable!("not a contrast function"),
    }
}

/// Composite Simpson rule for `∫ φ(x)·f(x) dx` over `[−12, 12]`.
fn gauss_simpson(f: impl Fn(f64) -> f64) -> f64 {
    const HALF_WIDTH: f64 = 12.0;
    const INTERVALS: usize = 4800;
    let h = 2.0 * HALF_WIDTH / INTERVALS as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let g = |x: f64| norm * (-x * x / 2.0).exp() * f(x);
    let mut acc = g(-HALF_WIDTH) + g(HALF_WIDTH);
    for i in 1..INTERVALS {
        let x = -HALF_WIDTH + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(x);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn set(a: Vec<f64>, b: Vec<f64>) -> TimeSeriesSet {
        TimeSeriesSet::new(vec![a, b]).unwrap()
    }

    fn value(kind: ObjectiveKind, y: &TimeSeriesSet) -> f64 {
        eval_objective(kind, y).unwrap().value
    }

    #[test]
    fn constant_channels() {
        let y = set(vec![3.0; 100], vec![-1.0; 100]);
        assert!((value(ObjectiveKind::O2, &y) - 100.0).abs() < 1e-12);
        assert!((value(ObjectiveKind::O1, &y) - 100.0).abs() < 1e-10);
        assert_eq!(value(ObjectiveKind::O3, &y), 0.0);
        assert!((value(ObjectiveKind::O5, &y) - 200.0).abs() < 1e-12);
    }

    #[test]
    fn o3_vanishes_with_one_constant_channel() {
        let y = set((0..50).map(|t| (t as f64 * 0.4).sin()).collect(), vec![2.0; 50]);
        assert_eq!(value(ObjectiveKind::O3, &y), 0.0);
    }

    #[test]
    fn o5_ramp_and_constant() {
        let t_len = 100;
        let y = set((0..t_len).map(|t| t as f64).collect(), vec![0.5; t_len]);
        let want = t_len as f64 * (2f64.sqrt() + 1.0);
        assert!((value(ObjectiveKind::O5, &y) - want).abs() < 2.0);
    }

    #[test]
    fn o4_is_finite_with_zero_derivatives() {
        let y = set(vec![1.0; 10], (0..10).map(|t| t as f64).collect());
        let v = value(ObjectiveKind::O4, &y);
        assert!((v - 10.0 * O4_CLAMP.ln()).abs() < 1e-9);
    }

    #[test]
    fn arity_checks() {
        let one = TimeSeriesSet::new(vec![vec![0.0, 1.0, 3.0]]).unwrap();
        assert!(matches!(eval_objective(ObjectiveKind::O3, &one), Err(Error::Arity(_))));
        assert!(matches!(eval_objective(ObjectiveKind::O3Tilde, &one), Err(Error::Arity(_))));
        assert!(eval_objective(ObjectiveKind::O5, &one).is_ok());
        let three = TimeSeriesSet::new(vec![vec![0.0, 1.0, 3.0]; 3]).unwrap();
        assert!(matches!(eval_objective(ObjectiveKind::O3Tilde, &three), Err(Error::Arity(_))));
        assert!(eval_objective(ObjectiveKind::O1, &three).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(ObjectiveKind::G1 { a1: 2.5 }.validate().is_err());
        assert!(ObjectiveKind::G2 { a2: 0.0 }.validate().is_err());
        assert!(ObjectiveKind::Mi { bins: Some(4) }.validate().is_err());
        assert!(ObjectiveKind::G1 { a1: 1.5 }.validate().is_ok());
        assert!("bogus".parse::<ObjectiveKind>().is_err());
        assert_eq!("MI".parse::<ObjectiveKind>().unwrap(), ObjectiveKind::Mi { bins: None });
    }

    #[test]
    fn entropy_of_uniform_and_gaussian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        assert!(marginal_entropy(&u, 64).unwrap().abs() < 0.02);
        let g: Vec<f64> = (0..100_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        let h = marginal_entropy(&g, default_bins(g.len())).unwrap();
        assert!((h - want).abs() < 0.03, "{h} vs {want}");
    }

    #[test]
    fn entropy_of_constant_is_degenerate() {
        assert!(matches!(marginal_entropy(&[1.0; 20], 8), Err(Error::DegenerateEntropy)));
    }

    #[test]
    fn gaussian_expectations_match_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
        for kind in [
            ObjectiveKind::G1 { a1: 1.0 },
            ObjectiveKind::G1 { a1: 2.0 },
            ObjectiveKind::G2 { a2: 1.0 },
            ObjectiveKind::G2 { a2: 0.5 },
            ObjectiveKind::G3,
        ] {
            let mc = draws.iter().map(|&x| contrast(kind, x)).sum::<f64>() / draws.len() as f64;
            let exact = gaussian_expectation(kind);
            // 10⁶ draws: standard error below 2e-3 for all three contrasts
            assert!((mc - exact).abs() < 5e-3, "{kind}: {mc} vs {exact}");
        }
        assert!((gaussian_expectation(ObjectiveKind::G2 { a2: 1.0 }) + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn o3_scales_with_power_n() {
        let y = set(
            (0..64).map(|t| (t as f64 * 0.3).sin()).collect(),
            (0..64).map(|t| (t as f64 * 0.11).cos()).collect(),
        );
        let scaled = set(
            y.channel(0).iter().map(|v| 2.5 * v).collect(),
            y.channel(1).iter().map(|v| 2.5 * v).collect(),
        );
        let ratio = value(ObjectiveKind::O3, &scaled) / value(ObjectiveKind::O3, &y);
        assert!((ratio - 6.25).abs() < 1e-12);
    }

    #[test]
    fn o5_lower_bound() {
        let y = set(
            (0..64).map(|t| (t as f64 * 0.3).sin()).collect(),
            vec![0.0; 64],
        );
        assert!(value(ObjectiveKind::O5, &y) >= 128.0);
    }
}
