//! Exact covariance engine against independent oracles.
//!
//! Two independent routes check the engine: literal lattice sums written
//! straight from the gluing definitions, and a Monte Carlo estimate that
//! pushes sampled Gaussian fields through the spectral product kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tff_core::lattice::{for_each_box, hat2, Color, Mode, ModeLattice, MAX_D};
use tff_core::nonlocal::nonlocal_product_c;
use tff_core::renorm;
use tff_core::{Complex64, FourierField};
use tff_diagrams::{wick_covariance, CovKernel, ObjectKind, SkeletonSpec};

const BUDGET: u128 = 1 << 34;

fn embed(v: &[i64]) -> Mode {
    let mut m = [0i64; MAX_D];
    m[..v.len()].copy_from_slice(v);
    m
}

#[test]
fn free_field_total_is_the_spectral_sum() {
    for beta in [0.0, 0.3] {
        let got = wick_covariance(
            &SkeletonSpec::new(ObjectKind::X, 3),
            2,
            0.0,
            beta,
            &CovKernel::Hard,
            false,
            BUDGET,
        )
        .unwrap();
        let mut expect = 0.0;
        for_each_box(3, 2, |v| {
            let h2 = hat2(&embed(v));
            expect += h2.powf(beta) / h2;
        });
        assert!((got.total - expect).abs() < 1e-12 * expect.abs());
    }
}

/// First-slot gluing: the output mode lives on the color axis, the glued
/// pair runs over the complementary box. The zero mode keeps only the
/// variance left after the mass counterterm removes the mean.
#[test]
fn first_slot_gluing_matches_independent_lattice_sums() {
    let d = 3;
    for n in [1i64, 2] {
        for beta in [0.0, 0.3] {
            let got = wick_covariance(
                &SkeletonSpec::new(ObjectKind::X2m, d),
                n,
                0.0,
                beta,
                &CovKernel::Hard,
                false,
                BUDGET,
            )
            .unwrap();
            let mut expect = 0.0;
            for mc in -n..=n {
                let w = (1.0 + (mc * mc) as f64).powf(beta);
                let mut cross = 0.0;
                let mut square = 0.0;
                for_each_box(d - 1, n, |q| {
                    let q2: i64 = q.iter().map(|x| x * x).sum();
                    let base = 1.0 + q2 as f64;
                    cross += 1.0 / base / (base + (mc * mc) as f64);
                    square += 1.0 / (base * base);
                });
                expect += w * if mc == 0 { 2.0 * square } else { cross };
            }
            assert!(
                (got.total - expect).abs() < 1e-12 * expect.abs(),
                "n={n} beta={beta}: engine {} vs oracle {expect}",
                got.total
            );
        }
    }
}

/// Last-slot gluing: the output mode lives on the complementary axes, the
/// glued pair runs along the color axis, and no counterterm is subtracted,
/// so the zero mode keeps its squared mean.
#[test]
fn last_slot_gluing_matches_independent_lattice_sums() {
    let d = 3;
    for n in [1i64, 2] {
        for beta in [0.0, 0.3] {
            let got = wick_covariance(
                &SkeletonSpec::new(ObjectKind::X2nm, d),
                n,
                0.0,
                beta,
                &CovKernel::Hard,
                false,
                BUDGET,
            )
            .unwrap();
            let mut expect = 0.0;
            for_each_box(d - 1, n, |mhat| {
                let m2: i64 = mhat.iter().map(|x| x * x).sum();
                let w = (1.0 + m2 as f64).powf(beta);
                let mut cross = 0.0;
                let mut mean = 0.0;
                let mut square = 0.0;
                for wc in -n..=n {
                    let axis = 1.0 + (wc * wc) as f64;
                    cross += 1.0 / (axis + m2 as f64) / axis;
                    mean += 1.0 / axis;
                    square += 1.0 / (axis * axis);
                }
                expect += w * if m2 == 0 {
                    mean * mean + 2.0 * square
                } else {
                    cross
                };
            });
            assert!(
                (got.total - expect).abs() < 1e-12 * expect.abs(),
                "n={n} beta={beta}: engine {} vs oracle {expect}",
                got.total
            );
        }
    }
}

/// Draws a stationary Gaussian field: independent complex modes with
/// variance `1/<m>^2`, conjugate-paired so the field is hermitian, the
/// self-conjugate zero mode real.
fn sample_field(lat: &ModeLattice, rng: &mut ChaCha8Rng) -> FourierField {
    let mut normals = Vec::with_capacity(2 * lat.len());
    let mut gauss = || {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    for _ in 0..lat.len() {
        normals.push((gauss(), gauss()));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); lat.len()];
    for idx in 0..lat.len() {
        let neg = lat.neg_index(idx);
        let sigma2 = 1.0 / hat2(&lat.mode(idx));
        let (a, b) = normals[idx];
        if idx == neg {
            coeffs[idx] = Complex64::new(a * sigma2.sqrt(), 0.0);
        } else if idx < neg {
            let scale = (sigma2 / 2.0).sqrt();
            coeffs[idx] = Complex64::new(a * scale, b * scale);
            coeffs[neg] = coeffs[idx].conj();
        }
    }
    FourierField::from_vec(lat.clone(), coeffs).unwrap()
}

fn weighted_norm_sq(tau: &FourierField, beta: f64) -> f64 {
    let lat = tau.lattice();
    (0..lat.len())
        .map(|idx| hat2(&lat.mode(idx)).powf(beta) * tau.as_slice()[idx].norm_sqr())
        .sum()
}

struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Self {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn se(&self) -> f64 {
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Monte Carlo estimates of the weighted covariances, computed through the
/// spectral product kernel rather than the pairing engine, agree with the
/// exact totals within four standard errors.
#[test]
fn sampled_totals_match_the_exact_engine() {
    let d = 3;
    let n = 1i64;
    let beta = 0.3;
    let samples = 20_000usize;
    let lat = ModeLattice::cubic(d, n).unwrap();
    let c1 = renorm::c1(d, n);
    let color = Color::new(1, d).unwrap();
    let one = {
        let mut f = FourierField::zeros(lat.clone());
        *f.coeff_mut(&[0; MAX_D]) = Complex64::new(1.0, 0.0);
        f
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut stats = [
        Welford::new(),
        Welford::new(),
        Welford::new(),
        Welford::new(),
    ];
    for _ in 0..samples {
        let x = sample_field(&lat, &mut rng);
        stats[0].push(weighted_norm_sq(&x, beta));

        let mut x2m = nonlocal_product_c(&one, &x, &x, color).unwrap();
        *x2m.coeff_mut(&[0; MAX_D]) -= c1;
        stats[1].push(weighted_norm_sq(&x2m, beta));

        let x2nm = nonlocal_product_c(&x, &x, &one, color).unwrap();
        stats[2].push(weighted_norm_sq(&x2nm, beta));

        let mut x3 = FourierField::zeros(lat.clone());
        for c in 1..=d {
            let col = Color::new(c, d).unwrap();
            x3 = x3.plus(&nonlocal_product_c(&x, &x, &x, col).unwrap());
        }
        x3.add_scaled(-(d as f64) * c1, &x);
        stats[3].push(weighted_norm_sq(&x3, beta));
    }
    let kinds = [
        ObjectKind::X,
        ObjectKind::X2m,
        ObjectKind::X2nm,
        ObjectKind::X3,
    ];
    for (kind, stat) in kinds.iter().zip(&stats) {
        let exact = wick_covariance(
            &SkeletonSpec::new(*kind, d),
            n,
            0.0,
            beta,
            &CovKernel::Hard,
            false,
            BUDGET,
        )
        .unwrap()
        .total;
        let se = stat.se();
        assert!(
            se.is_finite() && se > 0.0 && se < 0.2 * exact.abs(),
            "{kind:?}: degenerate standard error {se}"
        );
        assert!(
            (stat.mean - exact).abs() <= 4.0 * se,
            "{kind:?}: sampled {} vs exact {exact} (se {se})",
            stat.mean
        );
    }
}
