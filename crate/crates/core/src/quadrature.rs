//! Deterministic quadrature helpers.

use crate::error::{CoreError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence. Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_{n-1} by upward recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / deriv;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let deriv = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * deriv * deriv);
    }
    (nodes, weights)
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    if depth > 50 {
        return Err(CoreError::BudgetExceeded(
            "adaptive quadrature exceeded recursion depth 50".into(),
        ));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        Ok(left + right + delta / 15.0)
    } else {
        let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(CoreError::InvalidArgument("bad quadrature interval".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    // Seed with a fixed split so plateaus at the endpoints cannot fool the
    // first error estimate.
    let pieces = 8;
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for k in 0..pieces {
        let x0 = a + k as f64 * h;
        let x1 = x0 + h;
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        let whole = simpson(f0, fm, f1, h);
        total += adapt(f, x0, x1, f0, fm, f1, whole, tol / pieces as f64, 0)?;
    }
    Ok(total)
}

/// The linear-divergence constant in four dimensions:
/// the integral of `1/|x|^2` over `[-2,2]^3` minus `[-1,1]^3`, evaluated as
/// 56 unit cubes with a 24-point tensor Gauss-Legendre rule per cube.
pub fn kappa4() -> f64 {
    let (nodes, weights) = gauss_legendre(24);
    let mut total = 0.0;
    for a in -2i64..2 {
        for b in -2i64..2 {
            for c in -2i64..2 {
                if (-1..1).contains(&a) && (-1..1).contains(&b) && (-1..1).contains(&c) {
                    continue;
                }
                let mut cube = 0.0;
                for (i, &xi) in nodes.iter().enumerate() {
                    let x = a as f64 + 0.5 * (xi + 1.0);
                    for (j, &yj) in nodes.iter().enumerate() {
                        let y = b as f64 + 0.5 * (yj + 1.0);
                        let wxy = weights[i] * weights[j];
                        for (k, &zk) in nodes.iter().enumerate() {
                            let z = c as f64 + 0.5 * (zk + 1.0);
                            cube += wxy * weights[k] / (x * x + y * y + z * z);
                        }
                    }
                }
                // Jacobian (1/2)^3 per axis mapping [-1,1] to a unit cube.
                total += cube * 0.125;
            }
        }
    }
    total
}
