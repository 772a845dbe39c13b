mod common;

use arcsep::baselines::{amuse, joint_offdiagonal, lagged_covariance, sobi, LagSet};
use arcsep::search::angle_error;
use arcsep::whitening::whiten;
use arcsep::Error;

fn ar_pair(t_len: usize, seed: u64) -> arcsep::TimeSeriesSet {
    common::sources("ar1:0.9", "ar1:0.2", t_len, seed)
}

#[test]
fn white_noise_lag_covariance_is_small() {
    let t_len = 100_000;
    let z = common::gaussian_set(21, 2, t_len);
    let bound = 3.0 / (t_len as f64).sqrt();
    for tau in [1, 5, 17] {
        let m = lagged_covariance(&z, tau).unwrap();
        assert_eq!(m[0][1], m[1][0]);
        assert!(m.iter().flatten().all(|v| v.abs() < bound), "{m:?}");
    }
}

#[test]
fn amuse_and_sobi_separate_ar_sources() {
    let s = ar_pair(100_000, 1);
    let z = common::rotated(&s, -33.0);
    let a = amuse(&z, 1).unwrap();
    assert!(angle_error(a.theta_deg, -33.0) < 2.0, "{}", a.theta_deg);
    let b = sobi(&z, &LagSet::default()).unwrap();
    assert!(angle_error(b.theta_deg, -33.0) < 2.0, "{}", b.theta_deg);
}

#[test]
fn white_noise_is_rejected() {
    let z = whiten(&common::gaussian_set(22, 2, 20_000)).unwrap().whitened;
    for tau in [1, 2, 7] {
        assert!(matches!(amuse(&z, tau), Err(Error::TrivialLag(_))));
    }
    assert!(matches!(sobi(&z, &LagSet::default()), Err(Error::TrivialLag(_))));
}

#[test]
fn coinciding_autocorrelations_are_rejected() {
    // ρ(τ) = aᵗ: 0.8 and −0.8 agree at τ = 2 and differ at τ = 1
    let s = common::sources("ar1:0.8", "ar1:-0.8", 50_000, 4);
    let z = common::rotated(&s, 25.0);
    assert!(matches!(amuse(&z, 2), Err(Error::TrivialLag(_))));
    let r = amuse(&z, 1).unwrap();
    assert!(angle_error(r.theta_deg, 25.0) < 2.0);
}

#[test]
fn single_lag_sobi_is_amuse() {
    let z = common::mixed(&ar_pair(20_000, 2));
    for tau in [1, 2, 3] {
        let a = amuse(&z, tau).unwrap().theta_deg;
        let b = sobi(&z, &LagSet::new(vec![tau]).unwrap()).unwrap().theta_deg;
        assert!(angle_error(a, b) < 0.1, "tau {tau}: {a} vs {b}");
    }
}

#[test]
fn closed_form_beats_fine_scan() {
    let z = common::mixed(&ar_pair(20_000, 3));
    let lags = LagSet::default();
    let ms: Vec<_> = lags.lags().iter().map(|&t| lagged_covariance(&z, t).unwrap()).collect();
    let r = sobi(&z, &lags).unwrap();
    // the unmixing is R(θ̂)ᵀ, so the diagonalizing rotation angle is −θ̂
    let best = joint_offdiagonal(&ms, -r.theta_deg);
    for k in 0..18_000 {
        let deg = -90.0 + 0.01 * k as f64;
        assert!(best <= joint_offdiagonal(&ms, deg) + 1e-15, "scan wins at {deg}");
    }
}

#[test]
fn sobi_ignores_lag_order() {
    let z = common::mixed(&ar_pair(20_000, 5));
    let a = sobi(&z, &"1,2,3,4,5".parse().unwrap()).unwrap();
    let b = sobi(&z, &"5,3,1,4,2".parse().unwrap()).unwrap();
    assert!(angle_error(a.theta_deg, b.theta_deg) < 1e-9);
}

#[test]
fn lags_must_fit_the_signal() {
    let z = common::mixed(&ar_pair(2048, 6));
    assert!(matches!(sobi(&z, &LagSet::new(vec![1, 600]).unwrap()), Err(Error::Range(_))));
    assert!(matches!(lagged_covariance(&z, 2048), Err(Error::Range(_))));
}
