//! The color-wise non-local (tensor) product and its derived functionals.
//!
//! Fourier kernel per color c:
//!
//! ```text
//! N^c(f,g,h)_m = sum_n f_(m_chat, n_c) g_(-n) h_(n_chat, m_c)
//! ```
//!
//! The fast path factors the sum into two matrix products per color: with
//! fields repacked as (hyperplane x c-axis) matrices and `grev_k = g_(-k)`,
//!
//! ```text
//! B(n_c, m_c) = sum_{n_chat} grev[n_chat, n_c] h[n_chat, m_c]   (stage 1)
//! out[m_chat, m_c] = sum_{n_c} f[m_chat, n_c] B(n_c, m_c)       (stage 2)
//! ```
//!
//! which is O(K^2 M) per color instead of the naive O((KM)^2). The naive
//! Fourier sum and a direct-space quadrature evaluation are kept as
//! independent oracles.

use crate::cgemm::{cmatmul, cmatmul_adj_left, CMat};
use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::grid;
use crate::lattice::{self, Color, ModeLattice};
use crate::Complex64;

/// Which slot of `N^c` stays open in a partial pairing.
///
/// Melonic leaves slot 1 open (the divergence-producing filling),
/// NonMelonic slot 3, Exterior slot 2; Full has no open slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingKind {
    Melonic,
    NonMelonic,
    Exterior,
    Full,
}

/// Repacks flat lexicographic values of shape `sides` into a
/// (hyperplane x axis) matrix for axis `ax`; rows enumerate the remaining
/// axes lexicographically.
pub fn axis_matrix(vals: &[Complex64], sides: &[usize], ax: usize) -> CMat {
    let k = sides[ax];
    let m: usize = vals.len() / k;
    let pre: usize = sides[..ax].iter().product();
    let post: usize = sides[ax + 1..].iter().product();
    let mut out = CMat::zeros(m, k);
    for p in 0..pre {
        for j in 0..k {
            let in_base = (p * k + j) * post;
            for q in 0..post {
                let z = vals[in_base + q];
                let row = p * post + q;
                out.re[(row, j)] = z.re;
                out.im[(row, j)] = z.im;
            }
        }
    }
    out
}

/// Inverse of [`axis_matrix`].
pub fn from_axis_matrix(mat: &CMat, sides: &[usize], ax: usize) -> Vec<Complex64> {
    let k = sides[ax];
    let pre: usize = sides[..ax].iter().product();
    let post: usize = sides[ax + 1..].iter().product();
    let mut vals = vec![Complex64::new(0.0, 0.0); pre * k * post];
    for p in 0..pre {
        for j in 0..k {
            let out_base = (p * k + j) * post;
            for q in 0..post {
                let row = p * post + q;
                vals[out_base + q] = mat.get(row, j);
            }
        }
    }
    vals
}

fn field_sides(lat: &ModeLattice) -> Vec<usize> {
    (0..lat.d()).map(|k| lat.side(k)).collect()
}

fn field_axis_matrix(f: &FourierField, c: Color) -> CMat {
    axis_matrix(f.as_slice(), &field_sides(&f.lattice()), c.axis())
}

fn check_same_lattice(fields: &[&FourierField]) -> Result<ModeLattice> {
    let lat = fields[0].lattice();
    for f in &fields[1..] {
        if f.lattice() != lat {
            return Err(CoreError::LatticeMismatch(
                "non-local product arguments live on different lattices".into(),
            ));
        }
    }
    Ok(lat)
}

/// Fast staged evaluation of `N^c(f,g,h)`.
pub fn nonlocal_product_c(
    f: &FourierField,
    g: &FourierField,
    h: &FourierField,
    c: Color,
) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let sides = field_sides(&lat);
    let ax = c.axis();
    let grev = g.reversed();
    let gm = axis_matrix(grev.as_slice(), &sides, ax);
    let hm = axis_matrix(h.as_slice(), &sides, ax);
    let fm = axis_matrix(f.as_slice(), &sides, ax);
    let b = cmatmul(&gm, true, &hm, false);
    let out = cmatmul(&fm, false, &b, false);
    FourierField::from_vec(lat, from_axis_matrix(&out, &sides, ax))
}

/// `N(f,g,h) = sum_c N^c(f,g,h)`.
pub fn nonlocal_product(f: &FourierField, g: &FourierField, h: &FourierField) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let mut acc = FourierField::zeros(lat);
    for c in lat.colors() {
        acc.add_scaled(1.0, &nonlocal_product_c(f, g, h, c)?);
    }
    Ok(acc)
}

/// Naive O(len^2) Fourier-sum oracle for `N^c`.
pub fn naive_product_c(
    f: &FourierField,
    g: &FourierField,
    h: &FourierField,
    c: Color,
) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let mut out = FourierField::zeros(lat);
    for m in lat.modes() {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in lat.modes() {
            let fm = f.coeff(&lattice::with_component(&m, c, n[c.axis()]));
            let gm = g.coeff(&lattice::neg(&n));
            let hm = h.coeff(&lattice::with_component(&n, c, m[c.axis()]));
            acc += fm * gm * hm;
        }
        *out.coeff_mut(&m) = acc;
    }
    Ok(out)
}

/// Naive oracle summed over colors.
pub fn naive_product(f: &FourierField, g: &FourierField, h: &FourierField) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let mut acc = FourierField::zeros(lat);
    for c in lat.colors() {
        acc.add_scaled(1.0, &naive_product_c(f, g, h, c)?);
    }
    Ok(acc)
}

/// Direct-space quadrature oracle for `N^c`:
///
/// ```text
/// N^c(f,g,h)(x) = integral over y of f(x_chat, y_c) g(y) h(y_chat, x_c)
/// ```
///
/// evaluated on a `2 side` grid per axis (exact for band-limited inputs) and
/// re-analyzed into coefficients.
pub fn quadrature_product_c(
    f: &FourierField,
    g: &FourierField,
    h: &FourierField,
    c: Color,
) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let d = lat.d();
    let ax = c.axis();
    let gs = 2 * (0..d).map(|k| lat.side(k)).max().unwrap();
    let sides = vec![gs; d];
    let fg = grid::synthesize(f, gs);
    let gg = grid::synthesize(g, gs);
    let hg = grid::synthesize(h, gs);
    let fmat = axis_matrix(&fg.vals, &sides, ax);
    let gmat = axis_matrix(&gg.vals, &sides, ax);
    let hmat = axis_matrix(&hg.vals, &sides, ax);
    // W(y_c, x_c) = sum_{y_chat} g[y_chat, y_c] h[y_chat, x_c]
    let w = cmatmul(&gmat, true, &hmat, false);
    // out(x_chat, x_c) = (1/g^d) sum_{y_c} f[x_chat, y_c] W(y_c, x_c)
    let mut out = cmatmul(&fmat, false, &w, false);
    let norm = 1.0 / (gs as f64).powi(d as i32);
    out.re.mapv_inplace(|v| v * norm);
    out.im.mapv_inplace(|v| v * norm);
    let vals = from_axis_matrix(&out, &sides, ax);
    grid::analyze(
        &grid::GridValues {
            d,
            g: gs,
            vals,
        },
        lat,
    )
}

/// Quadrature oracle summed over colors.
pub fn quadrature_product(
    f: &FourierField,
    g: &FourierField,
    h: &FourierField,
) -> Result<FourierField> {
    let lat = check_same_lattice(&[f, g, h])?;
    let mut acc = FourierField::zeros(lat);
    for c in lat.colors() {
        acc.add_scaled(1.0, &quadrature_product_c(f, g, h, c)?);
    }
    Ok(acc)
}

/// Fills all slots of `N^c` but the one `kind` leaves open with `a`, `b`
/// (in order) and puts `target` in the open slot.
pub fn partial_pairing(
    kind: PairingKind,
    a: &FourierField,
    b: &FourierField,
    c: Color,
    target: &FourierField,
) -> Result<FourierField> {
    match kind {
        PairingKind::Melonic => nonlocal_product_c(target, a, b, c),
        PairingKind::NonMelonic => nonlocal_product_c(a, b, target, c),
        PairingKind::Exterior => nonlocal_product_c(a, target, b, c),
        PairingKind::Full => Err(CoreError::NoOpenSlot),
    }
}

/// Color-c Gram route for the quartic functional: `Tr(M_c(u)^2)` as the
/// squared Frobenius norm of `G^H G`.
fn interaction_c(phi: &FourierField, c: Color) -> f64 {
    let gm = field_axis_matrix(phi, c);
    cmatmul_adj_left(&gm, &gm).frobenius_sq()
}

/// The quartic interaction functional `sum_c Tr(M_c(phi)^2)`, nonnegative
/// by construction.
///
/// Debug builds cross-check the independent pairing route
/// `sum_c (N^c(phi,phi,phi), phi)` to 1e-10 relative.
pub fn interaction(phi: &FourierField) -> f64 {
    let val: f64 = phi.lattice().colors().map(|c| interaction_c(phi, c)).sum();
    #[cfg(debug_assertions)]
    {
        if phi.hermitian_defect() < 1e-9 {
            let alt = interaction_pairing_route(phi).expect("pairing route");
            let scale = val.abs().max(alt.abs()).max(1e-300);
            debug_assert!(
                (val - alt).abs() / scale < 1e-10,
                "interaction routes disagree: {val} vs {alt}"
            );
        }
    }
    val
}

/// Pairing route for the quartic functional, `sum_c Re (N^c(phi,phi,phi), phi)`.
pub fn interaction_pairing_route(phi: &FourierField) -> Result<f64> {
    let mut acc = 0.0;
    for c in phi.lattice().colors() {
        let prod = nonlocal_product_c(phi, phi, phi, c)?;
        acc += prod.l2_pairing(phi).re;
    }
    Ok(acc)
}

/// Gradient of `(1/4) interaction`, i.e. `N(phi,phi,phi)`.
pub fn quartic_gradient(phi: &FourierField) -> Result<FourierField> {
    nonlocal_product(phi, phi, phi)
}

/// Drift of the cut-off Langevin dynamic:
/// `ct * phi - (1 - Laplace) phi - N(phi,phi,phi)`.
pub fn action_gradient(phi: &FourierField, counterterm: f64) -> Result<FourierField> {
    let mut out = phi.mapped(|m, z| z * (counterterm - lattice::hat2(m)));
    out.add_scaled(-1.0, &quartic_gradient(phi)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use approx::assert_abs_diff_eq;

    fn ones(lat: ModeLattice) -> FourierField {
        FourierField::constant(lat, 1.0)
    }

    #[test]
    fn all_ones_gives_one_per_color() {
        for (d, n) in [(2usize, 1i64), (3, 1), (4, 1)] {
            let lat = ModeLattice::cubic(d, n).unwrap();
            let one = ones(lat);
            for c in lat.colors() {
                let fast = nonlocal_product_c(&one, &one, &one, c).unwrap();
                let naive = naive_product_c(&one, &one, &one, c).unwrap();
                for m in lat.modes() {
                    let expect = if m == [0; 4] { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(fast.coeff(&m).re, expect, epsilon = 1e-13);
                    assert!((fast.coeff(&m) - naive.coeff(&m)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn unit_second_slot_collapses_the_sum() {
        let lat = ModeLattice::cubic(3, 1).unwrap();
        let f = random_hermitian(lat, 11, 1.0);
        let h = random_hermitian(lat, 12, 1.0);
        let one = ones(lat);
        for c in lat.colors() {
            let fast = nonlocal_product_c(&f, &one, &h, c).unwrap();
            for m in lat.modes() {
                let expect = f.coeff(&lattice::with_component(&m, c, 0))
                    * h.coeff(&lattice::with_component(&[0; 4], c, m[c.axis()]));
                assert!((fast.coeff(&m) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_equals_naive_equals_quadrature() {
        for (d, n) in [(2usize, 2i64), (3, 1)] {
            let lat = ModeLattice::cubic(d, n).unwrap();
            let f = random_hermitian(lat, 21, 1.0);
            let g = random_hermitian(lat, 22, 0.7);
            let h = random_hermitian(lat, 23, 1.3);
            for c in lat.colors() {
                let fast = nonlocal_product_c(&f, &g, &h, c).unwrap();
                let naive = naive_product_c(&f, &g, &h, c).unwrap();
                let quad = quadrature_product_c(&f, &g, &h, c).unwrap();
                for i in 0..lat.len() {
                    assert!((fast.as_slice()[i] - naive.as_slice()[i]).norm() < 1e-11);
                    assert!((quad.as_slice()[i] - naive.as_slice()[i]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn fast_kernel_handles_non_hermitian_inputs() {
        let lat = ModeLattice::cubic(2, 2).unwrap();
        // Deliberately break the symmetry; the kernel is defined for any
        // complex coefficients and must match the naive sum.
        let f = FourierField::from_fn(lat, |m| Complex64::new(m[0] as f64, (m[1] * m[1]) as f64));
        let g = FourierField::from_fn(lat, |m| Complex64::new(0.3, m[0] as f64 - m[1] as f64));
        let h = FourierField::from_fn(lat, |m| Complex64::new((m[0] * m[1]) as f64, 1.0));
        for c in lat.colors() {
            let fast = nonlocal_product_c(&f, &g, &h, c).unwrap();
            let naive = naive_product_c(&f, &g, &h, c).unwrap();
            for i in 0..lat.len() {
                assert!((fast.as_slice()[i] - naive.as_slice()[i]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn interaction_of_simple_fields() {
        let lat = ModeLattice::cubic(3, 1).unwrap();
        let alpha = 1.7;
        let phi = FourierField::constant(lat, alpha);
        assert_abs_diff_eq!(interaction(&phi), 3.0 * alpha.powi(4), epsilon = 1e-10);
        // e_m + e_{-m} with every component nonzero: per-color value 2.
        let pair = FourierField::hermitian_pair(lat, &[1, -1, 1, 0], 1.0);
        assert_abs_diff_eq!(interaction(&pair), 2.0 * 3.0, epsilon = 1e-10);
        let zero = FourierField::zeros(lat);
        assert_eq!(interaction(&zero), 0.0);
    }

    #[test]
    fn interaction_routes_agree_on_random_fields() {
        let lat = ModeLattice::cubic(3, 1).unwrap();
        let phi = random_hermitian(lat, 31, 1.0);
        let m_route = interaction(&phi);
        let pairing = interaction_pairing_route(&phi).unwrap();
        assert_abs_diff_eq!(m_route, pairing, epsilon = 1e-10 * m_route.abs().max(1.0));
        assert!(m_route >= 0.0);
    }

    #[test]
    fn partial_pairing_slot_conventions() {
        let lat = ModeLattice::cubic(3, 1).unwrap();
        let a = random_hermitian(lat, 41, 1.0);
        let b = random_hermitian(lat, 42, 1.0);
        let t = random_hermitian(lat, 43, 1.0);
        let c = Color::new(2, 3).unwrap();
        let melonic = partial_pairing(PairingKind::Melonic, &a, &b, c, &t).unwrap();
        let expect_m = nonlocal_product_c(&t, &a, &b, c).unwrap();
        let exterior = partial_pairing(PairingKind::Exterior, &a, &b, c, &t).unwrap();
        let expect_e = nonlocal_product_c(&a, &t, &b, c).unwrap();
        let nonmel = partial_pairing(PairingKind::NonMelonic, &a, &b, c, &t).unwrap();
        let expect_n = nonlocal_product_c(&a, &b, &t, c).unwrap();
        for i in 0..lat.len() {
            assert_eq!(melonic.as_slice()[i], expect_m.as_slice()[i]);
            assert_eq!(exterior.as_slice()[i], expect_e.as_slice()[i]);
            assert_eq!(nonmel.as_slice()[i], expect_n.as_slice()[i]);
        }
        assert!(partial_pairing(PairingKind::Full, &a, &b, c, &t).is_err());
    }

    #[test]
    fn melonic_pairing_with_unit_pair_matches_naive() {
        let lat = ModeLattice::cubic(3, 1).unwrap();
        let one = ones(lat);
        let t = random_hermitian(lat, 44, 1.0);
        let c = Color::new(1, 3).unwrap();
        let got = partial_pairing(PairingKind::Melonic, &one, &one, c, &t).unwrap();
        let naive = naive_product_c(&t, &one, &one, c).unwrap();
        for i in 0..lat.len() {
            assert!((got.as_slice()[i] - naive.as_slice()[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn drift_on_constant_field() {
        let lat = ModeLattice::cubic(3, 0).unwrap();
        let alpha = 0.9;
        let phi = FourierField::constant(lat, alpha);
        let drift = action_gradient(&phi, 0.0).unwrap();
        let expect = -alpha - 3.0 * alpha.powi(3);
        assert_abs_diff_eq!(drift.coeff(&[0; 4]).re, expect, epsilon = 1e-12);
        let zero = FourierField::zeros(lat);
        assert_eq!(action_gradient(&zero, 2.0).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn trilinearity() {
        let lat = ModeLattice::cubic(2, 2).unwrap();
        let f1 = random_hermitian(lat, 51, 1.0);
        let f2 = random_hermitian(lat, 52, 1.0);
        let g = random_hermitian(lat, 53, 1.0);
        let h = random_hermitian(lat, 54, 1.0);
        let lhs = nonlocal_product(&f1.scaled(2.0).plus(&f2), &g, &h).unwrap();
        let mut rhs = nonlocal_product(&f1, &g, &h).unwrap().scaled(2.0);
        rhs.add_scaled(1.0, &nonlocal_product(&f2, &g, &h).unwrap());
        for i in 0..lat.len() {
            assert!((lhs.as_slice()[i] - rhs.as_slice()[i]).norm() < 1e-11);
        }
    }
}
