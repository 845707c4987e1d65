//! Complex matrix products on split real/imaginary storage.
//!
//! Complex GEMM is assembled from three real GEMMs (the 3-multiplication
//! split), each dispatched through `ndarray`'s cache-blocked `f64` kernel.
//! Split storage keeps the hot loops on contiguous real data.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2};

use crate::Complex64;

/// A complex matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone)]
pub struct CMat {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            re: Array2::zeros((rows, cols)),
            im: Array2::zeros((rows, cols)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        let s = self.re.dim();
        (s.0, s.1)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        Complex64::new(self.re[(r, c)], self.im[(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, z: Complex64) {
        self.re[(r, c)] = z.re;
        self.im[(r, c)] = z.im;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        CMat {
            re: self.re.t().to_owned(),
            im: self.im.t().mapv(|x| -x),
        }
    }

    /// Frobenius norm squared, `sum |a_ij|^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }
}

fn matmul_views(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    general_mat_mul(1.0, &a, &b, 0.0, &mut out);
    out
}

/// `A * B` with optional element transposes (no conjugation).
///
/// 3-multiplication split: with `P1 = Ar Br`, `P2 = Ai Bi`,
/// `P3 = (Ar + Ai)(Br + Bi)`, the product is `P1 - P2 + i (P3 - P1 - P2)`.
pub fn cmatmul(a: &CMat, ta: bool, b: &CMat, tb: bool) -> CMat {
    let (ar, ai) = if ta {
        (a.re.t(), a.im.t())
    } else {
        (a.re.view(), a.im.view())
    };
    let (br, bi) = if tb {
        (b.re.t(), b.im.t())
    } else {
        (b.re.view(), b.im.view())
    };
    let p1 = matmul_views(ar, br);
    let p2 = matmul_views(ai, bi);
    let sa = &ar + &ai;
    let sb = &br + &bi;
    let p3 = matmul_views(sa.view(), sb.view());
    CMat {
        re: &p1 - &p2,
        im: p3 - p1 - p2,
    }
}

/// `A^H * B` (conjugate-transposed left factor).
///
/// With `P1 = Ar^T Br`, `P2 = Ai^T Bi`, `P4 = (Ar - Ai)^T (Br + Bi)`, the
/// product is `P1 + P2 + i (P4 - P1 + P2)`.
pub fn cmatmul_adj_left(a: &CMat, b: &CMat) -> CMat {
    let p1 = matmul_views(a.re.t(), b.re.view());
    let p2 = matmul_views(a.im.t(), b.im.view());
    let da = &a.re - &a.im;
    let sb = &b.re + &b.im;
    let p4 = matmul_views(da.t(), sb.view());
    CMat {
        re: &p1 + &p2,
        im: p4 - p1 + p2,
    }
}
