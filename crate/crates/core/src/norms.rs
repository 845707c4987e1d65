//! Matrix norms of tensor fields and dyadic-block (Besov) norms.

use nalgebra::DMatrix;

use crate::cgemm::cmatmul_adj_left;
use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::grid;
use crate::lattice::Color;
use crate::nonlocal::axis_matrix;
use crate::Complex64;

/// The color-`c` Gram operator `M_c(a, b) = sum_{m_chat} u_(m_chat, a)
/// conj(u_(m_chat, b))`, a Hermitian positive semidefinite matrix indexed by
/// the mode component along the color axis.
pub fn m_operator(u: &FourierField, c: Color) -> DMatrix<Complex64> {
    let lat = u.lattice();
    let sides: Vec<usize> = (0..lat.d()).map(|k| lat.side(k)).collect();
    let g = axis_matrix(u.as_slice(), &sides, c.axis());
    // K = G^H G satisfies K(a, b) = conj(M_c(a, b)).
    let k = cmatmul_adj_left(&g, &g);
    let n = k.shape().0;
    DMatrix::from_fn(n, n, |a, b| {
        let z = k.get(a, b);
        Complex64::new(z.re, -z.im)
    })
}

/// Eigenvalues of `M_c`, floored at zero (the operator is PSD; the floor
/// absorbs rounding).
pub fn m_eigenvalues(u: &FourierField, c: Color) -> Vec<f64> {
    let m = m_operator(u, c);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect()
}

/// Color-`c` matrix norm for even `p`: `(Tr M_c^{p/2})^{1/p}`.
pub fn m_norm_color(u: &FourierField, c: Color, p: u32) -> Result<f64> {
    if p < 2 || p % 2 != 0 {
        return Err(CoreError::InvalidArgument(format!(
            "matrix norm defined for even p >= 2, got {p}"
        )));
    }
    let half = (p / 2) as i32;
    let total: f64 = m_eigenvalues(u, c).iter().map(|l| l.powi(half)).sum();
    Ok(total.powf(1.0 / p as f64))
}

/// Total fourth matrix norm: `(sum_c Tr M_c^2)^{1/4}`, the quartic
/// interaction to the power 1/4.
pub fn m4_norm_total(u: &FourierField) -> f64 {
    crate::nonlocal::interaction(u).powf(0.25)
}

/// Dyadic block of mode `m`: `-1` for the zero mode, otherwise the unique
/// `j >= 1` with `2^{j-1} <= |m|_inf < 2^j`.
pub fn dyadic_block(m: &crate::lattice::Mode) -> i32 {
    let linf = m.iter().map(|&x| x.abs()).max().unwrap();
    if linf == 0 {
        -1
    } else {
        64 - (linf as u64).leading_zeros() as i32
    }
}

/// Parameters of a dyadic-block norm.
#[derive(Debug, Clone, Copy)]
pub struct BesovSpec {
    /// Regularity exponent.
    pub alpha: f64,
    /// Integrability of each block on the physical grid.
    pub p: f64,
    /// Summability across blocks.
    pub q: f64,
    /// Physical-grid refinement per axis relative to the mode count.
    pub oversample: usize,
}

impl Default for BesovSpec {
    fn default() -> Self {
        BesovSpec {
            alpha: 0.0,
            p: 2.0,
            q: 2.0,
            oversample: 4,
        }
    }
}

/// Dyadic-block norm `( sum_j (2^{j alpha} ||block_j u||_{L^p})^q )^{1/q}`
/// with block `L^p` norms evaluated on an oversampled grid under the
/// normalized measure.
pub fn besov_norm(u: &FourierField, spec: &BesovSpec) -> Result<f64> {
    if spec.p < 1.0 || spec.q < 1.0 || spec.oversample == 0 {
        return Err(CoreError::InvalidArgument(
            "dyadic norm needs p >= 1, q >= 1, oversample >= 1".into(),
        ));
    }
    let lat = u.lattice();
    let side_max = (0..lat.d()).map(|k| lat.side(k)).max().unwrap();
    let g = spec.oversample * side_max;
    let top_block = lat
        .modes()
        .map(|m| dyadic_block(&m))
        .max()
        .unwrap_or(-1);
    let mut total = 0.0f64;
    for j in -1..=top_block {
        let mut block = FourierField::zeros(lat);
        let mut empty = true;
        for (idx, m) in lat.modes().enumerate() {
            if dyadic_block(&m) == j {
                block.as_mut_slice()[idx] = u.as_slice()[idx];
                empty = false;
            }
        }
        if empty {
            continue;
        }
        let vals = grid::synthesize(&block, g);
        let cells = vals.vals.len() as f64;
        let lp = (vals
            .vals
            .iter()
            .map(|z| z.norm().powf(spec.p))
            .sum::<f64>()
            / cells)
            .powf(1.0 / spec.p);
        total += (2f64.powf(j as f64 * spec.alpha) * lp).powf(spec.q);
    }
    Ok(total.powf(1.0 / spec.q))
}
