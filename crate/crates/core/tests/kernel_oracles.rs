//! Cross-oracle agreement for the non-local contraction kernel: the batched
//! matrix fast path, the naive Fourier sum, and direct-space quadrature.

mod common;

use common::{max_diff, random_complex, random_hermitian};
use tff_core::lattice::ModeLattice;
use tff_core::nonlocal;
use tff_core::FourierField;

fn size_grid() -> Vec<(usize, i64)> {
    vec![
        (2, 0),
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 5),
        (3, 0),
        (3, 1),
        (3, 2),
        (4, 1),
        (4, 2),
    ]
}

#[test]
fn fast_naive_quadrature_agree_on_random_fields() {
    for (d, n) in size_grid() {
        let lat = ModeLattice::cubic(d, n).unwrap();
        for rep in 0..10u64 {
            let seed = 1000 * d as u64 + 37 * n as u64 + rep;
            let f = random_hermitian(lat, seed, 1.0);
            let g = random_hermitian(lat, seed + 500_000, 1.0);
            let h = random_hermitian(lat, seed + 900_000, 1.0);
            let fast = nonlocal::nonlocal_product(&f, &g, &h).unwrap();
            let naive = nonlocal::naive_product(&f, &g, &h).unwrap();
            let quad = nonlocal::quadrature_product(&f, &g, &h).unwrap();
            assert!(
                max_diff(&fast, &naive) <= 1e-9,
                "fast vs naive at d={d} n={n} rep={rep}: {}",
                max_diff(&fast, &naive)
            );
            assert!(
                max_diff(&fast, &quad) <= 1e-9,
                "fast vs quadrature at d={d} n={n} rep={rep}: {}",
                max_diff(&fast, &quad)
            );
        }
    }
}

#[test]
fn oracles_agree_without_hermitian_symmetry() {
    for (d, n) in [(2usize, 2i64), (3, 1), (4, 1)] {
        let lat = ModeLattice::cubic(d, n).unwrap();
        for rep in 0..5u64 {
            let f = random_complex(lat, 71 + rep, 0.5);
            let g = random_complex(lat, 72 + rep, 0.5);
            let h = random_complex(lat, 73 + rep, 0.5);
            let fast = nonlocal::nonlocal_product(&f, &g, &h).unwrap();
            let naive = nonlocal::naive_product(&f, &g, &h).unwrap();
            let quad = nonlocal::quadrature_product(&f, &g, &h).unwrap();
            assert!(max_diff(&fast, &naive) <= 1e-10);
            assert!(max_diff(&fast, &quad) <= 1e-10);
        }
    }
}

#[test]
fn product_of_hermitian_fields_is_hermitian() {
    let lat = ModeLattice::cubic(3, 2).unwrap();
    let f = random_hermitian(lat, 5, 1.0);
    let g = random_hermitian(lat, 6, 1.0);
    let h = random_hermitian(lat, 7, 1.0);
    let out = nonlocal::nonlocal_product(&f, &g, &h).unwrap();
    assert!(out.hermitian_defect() < 1e-12);
}

#[test]
fn contraction_commutes_with_projection() {
    // Inputs supported on a sub-box contract identically on the big and the
    // small lattice: the cutoff acts by restriction on each slot.
    let big = ModeLattice::cubic(3, 3).unwrap();
    let small = ModeLattice::cubic(3, 1).unwrap();
    let f = random_hermitian(small, 21, 0.5);
    let g = random_hermitian(small, 22, 0.5);
    let h = random_hermitian(small, 23, 0.5);
    let fb = f.splice(big).unwrap();
    let gb = g.splice(big).unwrap();
    let hb = h.splice(big).unwrap();
    let on_big = nonlocal::nonlocal_product(&fb, &gb, &hb)
        .unwrap()
        .splice(small)
        .unwrap();
    let on_small = nonlocal::nonlocal_product(&f, &g, &h).unwrap();
    assert!(max_diff(&on_big, &on_small) <= 1e-12);
}

#[test]
fn trilinearity_in_each_slot() {
    let lat = ModeLattice::cubic(2, 2).unwrap();
    let a = random_hermitian(lat, 31, 0.5);
    let b = random_hermitian(lat, 32, 0.5);
    let g = random_hermitian(lat, 33, 0.5);
    let h = random_hermitian(lat, 34, 0.5);
    let combo = a.scaled(2.5).plus(&b.scaled(-0.75));
    for slot in 0..3 {
        let apply = |x: &FourierField| {
            let (f1, f2, f3) = match slot {
                0 => (x, &g, &h),
                1 => (&g, x, &h),
                _ => (&g, &h, x),
            };
            nonlocal::nonlocal_product(f1, f2, f3).unwrap()
        };
        let lhs = apply(&combo);
        let rhs = apply(&a).scaled(2.5).plus(&apply(&b).scaled(-0.75));
        assert!(max_diff(&lhs, &rhs) <= 1e-10, "slot {slot} not linear");
    }
}

#[test]
fn anisotropic_lattice_fast_matches_naive() {
    let lat = ModeLattice::anisotropic(2, &[2, 1]).unwrap();
    let f = random_complex(lat, 41, 0.0);
    let g = random_complex(lat, 42, 0.0);
    let h = random_complex(lat, 43, 0.0);
    let fast = nonlocal::nonlocal_product(&f, &g, &h).unwrap();
    let naive = nonlocal::naive_product(&f, &g, &h).unwrap();
    assert!(max_diff(&fast, &naive) <= 1e-11);
}
