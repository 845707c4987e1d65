//! Direct-space evaluation on uniform torus grids.
//!
//! Synthesis and analysis are axis-by-axis twiddle contractions (exact
//! trigonometric sums, no FFT dependency); with more grid points than twice
//! the band limit both directions are exact up to rounding, which is what
//! the quadrature oracle and the block L^p norms rely on.

use crate::error::{CoreError, Result};
use crate::field::FourierField;
use crate::lattice::ModeLattice;
use crate::Complex64;

/// Complex values on the uniform grid `{2 pi j / g}^d`, lexicographic,
/// axis 0 slowest.
#[derive(Debug, Clone)]
pub struct GridValues {
    pub d: usize,
    pub g: usize,
    pub vals: Vec<Complex64>,
}

/// Twiddle table `E[x, j] = exp(i (j - n) 2 pi x / g)`, `x < g`, `j < side`.
fn twiddle(g: usize, side: usize, n: i64, conj: bool) -> Vec<Complex64> {
    let mut e = Vec::with_capacity(g * side);
    let step = 2.0 * std::f64::consts::PI / g as f64;
    for x in 0..g {
        for j in 0..side {
            let m = j as i64 - n;
            let ang = step * (x as f64) * (m as f64);
            let (s, c) = ang.sin_cos();
            e.push(Complex64::new(c, if conj { -s } else { s }));
        }
    }
    e
}

/// Contracts axis `k` of `vals` (shape `sides`) with the `rows x sides[k]`
/// table `e`, replacing that axis length by `rows`.
fn contract_axis(vals: &[Complex64], sides: &[usize], k: usize, e: &[Complex64], rows: usize) -> Vec<Complex64> {
    let side = sides[k];
    let pre: usize = sides[..k].iter().product();
    let post: usize = sides[k + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); pre * rows * post];
    for p in 0..pre {
        for x in 0..rows {
            let erow = &e[x * side..(x + 1) * side];
            let out_base = (p * rows + x) * post;
            for (j, &ej) in erow.iter().enumerate() {
                let in_base = (p * side + j) * post;
                for q in 0..post {
                    out[out_base + q] += ej * vals[in_base + q];
                }
            }
        }
    }
    out
}

/// Evaluates `f` on the `g^d` grid. Exact for any `g >= 1`.
pub fn synthesize(f: &FourierField, g: usize) -> GridValues {
    let lat = f.lattice();
    let d = lat.d();
    let mut vals = f.as_slice().to_vec();
    let mut sides: Vec<usize> = (0..d).map(|k| lat.side(k)).collect();
    for k in 0..d {
        let e = twiddle(g, sides[k], lat.bound(k), false);
        vals = contract_axis(&vals, &sides, k, &e, g);
        sides[k] = g;
    }
    GridValues { d, g, vals }
}

/// Recovers coefficients on `lat` from grid values.
///
/// Exact when the underlying function is band-limited with per-axis degree
/// `D` satisfying `g > D + bound(k)` (no aliasing onto the target box).
pub fn analyze(grid: &GridValues, lat: ModeLattice) -> Result<FourierField> {
    if lat.d() != grid.d {
        return Err(CoreError::LatticeMismatch(format!(
            "grid d={} vs lattice d={}",
            grid.d,
            lat.d()
        )));
    }
    let d = grid.d;
    let g = grid.g;
    let mut vals = grid.vals.clone();
    let mut sides = vec![g; d];
    let norm = 1.0 / g as f64;
    for k in 0..d {
        let side = lat.side(k);
        // Adjoint table: rows are modes, columns grid points.
        let fwd = twiddle(g, side, lat.bound(k), true);
        let mut adj = vec![Complex64::new(0.0, 0.0); side * g];
        for x in 0..g {
            for j in 0..side {
                adj[j * g + x] = fwd[x * side + j] * norm;
            }
        }
        vals = contract_axis(&vals, &sides, k, &adj, side);
        sides[k] = side;
    }
    FourierField::from_vec(lat, vals)
}
