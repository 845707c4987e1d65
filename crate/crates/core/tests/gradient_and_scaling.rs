//! Finite-difference validation of the interaction gradient and the
//! divergence-rate fits of the first counterterm.

mod common;

use common::random_hermitian;
use tff_core::lattice::ModeLattice;
use tff_core::quadrature;
use tff_core::renorm::{self, RateModel};
use tff_core::{nonlocal, FourierField};

/// Directional derivative of `V(phi) = interaction(phi)/4` at `phi` along
/// `psi`, by central differences.
fn fd_directional(phi: &FourierField, psi: &FourierField, eps: f64) -> f64 {
    let plus = nonlocal::interaction(&phi.plus(&psi.scaled(eps))) / 4.0;
    let minus = nonlocal::interaction(&phi.plus(&psi.scaled(-eps))) / 4.0;
    (plus - minus) / (2.0 * eps)
}

#[test]
fn quartic_gradient_matches_finite_differences() {
    for (d, n) in [(2usize, 1i64), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2)] {
        let lat = ModeLattice::cubic(d, n).unwrap();
        let phi = random_hermitian(lat, 700 + d as u64, 0.5);
        let grad = nonlocal::quartic_gradient(&phi).unwrap();
        for rep in 0..20u64 {
            let psi = random_hermitian(lat, 7000 + rep, 0.5);
            let fd = fd_directional(&phi, &psi, 1e-5);
            let exact = grad.l2_pairing(&psi).re;
            let rel = (fd - exact).abs() / exact.abs().max(1e-8);
            assert!(
                rel <= 1e-6,
                "gradient mismatch at d={d} n={n} rep={rep}: fd={fd} exact={exact} rel={rel}"
            );
        }
    }
}

#[test]
fn action_gradient_is_minus_the_action_derivative() {
    let lat = ModeLattice::cubic(3, 1).unwrap();
    let phi = random_hermitian(lat, 77, 0.5);
    let ct = 1.75;
    let action = |f: &FourierField| {
        0.5 * f.sobolev_norm_sq(1.0) - 0.5 * ct * f.l2_norm_sq() + nonlocal::interaction(f) / 4.0
    };
    let drift = nonlocal::action_gradient(&phi, ct).unwrap();
    for rep in 0..10u64 {
        let psi = random_hermitian(lat, 7100 + rep, 0.5);
        let eps = 1e-5;
        let fd = (action(&phi.plus(&psi.scaled(eps))) - action(&phi.plus(&psi.scaled(-eps))))
            / (2.0 * eps);
        let exact = -drift.l2_pairing(&psi).re;
        assert!(
            (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
            "drift mismatch: fd={fd} exact={exact}"
        );
    }
}

#[test]
fn d3_counterterm_diverges_like_two_pi_log() {
    let ladder: Vec<(i64, f64)> = [64i64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| (n, renorm::c1(3, n)))
        .collect();
    let fit = renorm::divergence_rate(&ladder).unwrap();
    assert_eq!(fit.model, RateModel::LogN);
    let two_pi = std::f64::consts::TAU;
    // Successive-difference slopes approach 2*pi from below.
    let slopes = &fit.log_diff_slopes;
    for w in slopes.windows(2) {
        assert!(w[1] > w[0], "slope sequence must increase toward 2 pi");
    }
    let last = *slopes.last().unwrap();
    assert!(
        (last - two_pi).abs() / two_pi < 0.02,
        "slope {last} not within 2% of 2 pi"
    );
}

#[test]
fn d4_counterterm_diverges_linearly_with_kappa_slope() {
    let ladder: Vec<(i64, f64)> = [64i64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| (n, renorm::c1(4, n)))
        .collect();
    let fit = renorm::divergence_rate(&ladder).unwrap();
    assert_eq!(fit.model, RateModel::Linear);
    let kappa = quadrature::kappa4();
    // (c1(2N) - c1(N))/N approximates the continuum shell integral.
    let slope_at_512 = (ladder[4].1 - ladder[3].1) / 512.0;
    assert!(
        (slope_at_512 - kappa).abs() / kappa < 0.03,
        "slope {slope_at_512} not within 3% of kappa {kappa}"
    );
}

#[test]
fn d2_counterterm_stays_bounded() {
    let ladder: Vec<(i64, f64)> = [64i64, 128, 256, 512]
        .iter()
        .map(|&n| (n, renorm::c1(2, n)))
        .collect();
    // Tail of sum 1/(1+w^2) vanishes; successive slopes collapse to zero.
    let fit = renorm::divergence_rate(&ladder).unwrap();
    assert!(fit.log_diff_slopes.iter().all(|s| s.abs() < 0.05));
    let total_growth = ladder[3].1 - ladder[0].1;
    assert!(total_growth < 0.05);
    // Bounded by the exact limit pi*coth(pi).
    let limit = std::f64::consts::PI / std::f64::consts::PI.tanh();
    assert!(ladder.iter().all(|&(_, v)| v < limit));
    assert!((ladder[3].1 - limit).abs() < 0.01);
}
