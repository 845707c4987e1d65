//! Mass-type counterterms and renormalized amplitudes.
//!
//! Hard cut-off: per color,
//!
//! ```text
//! c1 = sum over the (d-1)-box of 1/<m_chat>^2
//! c2 = sum_{c' != c} sum_{m_chat} <m_chat>^{-4} sum_p R1 at the spliced mode
//! ```
//!
//! together with the renormalized amplitudes R1, R2 and the scale-flow (BG)
//! counterterm variants where the sharp indicator is replaced by the smooth
//! cutoff profile and a scale integral.

use crate::error::{CoreError, Result};
use crate::lattice::{self, Color, Mode};
use crate::quadrature;
use crate::rho;

fn in_box(m: &Mode, d: usize, n: i64) -> bool {
    m[..d].iter().all(|&x| x.abs() <= n)
}

/// Sharp cutoff indicator over weight: `ind(m) / <m>^{2p}`.
fn cut_weight(m: &Mode, d: usize, n: i64, p: i32) -> f64 {
    if in_box(m, d, n) {
        lattice::hat2(m).powi(-p)
    } else {
        0.0
    }
}

/// First counterterm per color: `sum_{m_chat in box^{d-1}} <m_chat>^{-2}`.
///
/// Independent of the color by lattice symmetry; evaluated over the
/// nonnegative octant with multiplicity `2^{#nonzero}`.
pub fn c1(d: usize, n: i64) -> f64 {
    let dim = d - 1;
    let mut total = 0.0;
    let mut point = vec![0i64; dim];
    fn rec(k: usize, n: i64, point: &mut [i64], total: &mut f64) {
        if k == point.len() {
            let norm2: f64 = point.iter().map(|&x| (x * x) as f64).sum();
            let mult = (1u64 << point.iter().filter(|&&x| x != 0).count()) as f64;
            *total += mult / (1.0 + norm2);
            return;
        }
        for v in 0..=n {
            point[k] = v;
            rec(k + 1, n, point, total);
        }
    }
    rec(0, n, &mut point, &mut total);
    total
}

/// First renormalized amplitude:
/// `R1(m) = ind(m)/<m>^2 - ind(m_chat)/<m_chat>^2` with the color
/// component zeroed in the second term. Vanishes whenever `m_c = 0`.
pub fn r1(d: usize, n: i64, c: Color, m: &Mode) -> f64 {
    let mhat = lattice::without_component(m, c);
    cut_weight(m, d, n, 1) - cut_weight(&mhat, d, n, 1)
}

/// Second renormalized amplitude:
/// `R2(m, k) = (1/2) (ind(m)/<m>^4 - ind(m_chat)/<m_chat>^4) R1(k)` with
/// `R1` taken in color `cp`.
pub fn r2(d: usize, n: i64, c: Color, cp: Color, m: &Mode, k: &Mode) -> f64 {
    let mhat = lattice::without_component(m, c);
    0.5 * (cut_weight(m, d, n, 2) - cut_weight(&mhat, d, n, 2)) * r1(d, n, cp, k)
}

/// Histogram of `|p|^2` over the box `{-n..n}^dim`.
fn norm2_histogram(dim: usize, n: i64) -> Vec<f64> {
    let max = (dim as i64) * n * n;
    let mut hist = vec![0.0f64; (max + 1) as usize];
    lattice::for_each_box(dim, n, |p| {
        let s: i64 = p.iter().map(|&x| x * x).sum();
        hist[s as usize] += 1.0;
    });
    hist
}

/// Second counterterm per color (hard cut-off), via the radial histogram of
/// the inner lattice sum.
///
/// The inner sum `sum_p [1/(1+|p|^2+w^2) - 1/(1+|p|^2)]` depends only on the
/// external component `w` carried over from the outer mode; both indicator
/// factors confine `p` to the box, so no tail estimate is involved.
pub fn c2(d: usize, n: i64, _c: Color) -> f64 {
    let dim = d - 1;
    let hist = norm2_histogram(dim, n);
    let inner: Vec<f64> = (0..=n)
        .map(|w| {
            let w2 = (w * w) as f64;
            hist.iter()
                .enumerate()
                .map(|(s, &cnt)| cnt * (1.0 / (1.0 + s as f64 + w2) - 1.0 / (1.0 + s as f64)))
                .sum()
        })
        .collect();
    // Outer sum over the (d-1)-box and the d-1 choices of c'; by symmetry
    // every position of the c' component contributes equally.
    let mut total = 0.0;
    lattice::for_each_box(dim, n, |v| {
        let norm2: f64 = v.iter().map(|&x| (x * x) as f64).sum();
        let wt = (1.0 + norm2).powi(-2);
        for &comp in v {
            total += wt * inner[comp.unsigned_abs() as usize];
        }
    });
    total
}

/// Brute-force nested-sum reference for `c2`, following the proof formula
/// index by index: half per melonic ordering, two orderings, explicit `R1`
/// calls on spliced full modes.
pub fn c2_nested_reference(d: usize, n: i64, c: Color) -> f64 {
    let dim = d - 1;
    let outer_axes: Vec<usize> = (0..d).filter(|&k| k != c.axis()).collect();
    let mut total = 0.0;
    for cp in 1..=d {
        if cp == c.get() {
            continue;
        }
        let cp = Color::new(cp, d).unwrap();
        let inner_axes: Vec<usize> = (0..d).filter(|&k| k != cp.axis()).collect();
        lattice::for_each_box(dim, n, |mv| {
            let mut mu: Mode = [0; lattice::MAX_D];
            for (slot, &axis) in outer_axes.iter().enumerate() {
                mu[axis] = mv[slot];
            }
            let w = mu[cp.axis()];
            let wt = lattice::hat2(&mu).powi(-2);
            let mut inner_sum = 0.0;
            lattice::for_each_box(dim, n, |pv| {
                let mut nu: Mode = [0; lattice::MAX_D];
                for (slot, &axis) in inner_axes.iter().enumerate() {
                    nu[axis] = pv[slot];
                }
                nu[cp.axis()] = w;
                inner_sum += r1(d, n, cp, &nu);
            });
            // One half per ordering, summed over the two orderings.
            total += 2.0 * 0.5 * wt * inner_sum;
        });
    }
    total
}

/// Multiplier form of the exterior-pairing Wick mean:
/// `E[N^c(X, psi, X)]_m = psi_m * ind(m)/<m>^2`.
pub fn exterior_mean_multiplier(d: usize, n: i64, m: &Mode) -> f64 {
    cut_weight(m, d, n, 1)
}

/// Multiplier form of the non-melonic Wick mean:
/// `E[N^c(X, X, psi)]_m = psi_m * sum_w ind(m_chat, w)/<(m_chat, w)>^2`.
pub fn nonmelonic_mean_multiplier(d: usize, n: i64, c: Color, m: &Mode) -> f64 {
    (-n..=n)
        .map(|w| cut_weight(&lattice::with_component(m, c, w), d, n, 1))
        .sum()
}

/// Multiplier form of the renormalized melonic Wick mean:
/// `E[N^c(psi, X, X) - c1 psi]_m = psi_m * sum_{n_chat} R1(n_chat, m_c)`.
pub fn melonic_residual_multiplier(d: usize, n: i64, c: Color, m: &Mode) -> f64 {
    let dim = d - 1;
    let axes: Vec<usize> = (0..d).filter(|&k| k != c.axis()).collect();
    let mut total = 0.0;
    lattice::for_each_box(dim, n, |nv| {
        let mut nu: Mode = [0; lattice::MAX_D];
        for (slot, &axis) in axes.iter().enumerate() {
            nu[axis] = nv[slot];
        }
        nu[c.axis()] = m[c.axis()];
        total += r1(d, n, c, &nu);
    });
    total
}

/// Validates that the enumeration box `{-tail..tail}` encloses the support
/// of `rho_t` (profile vanishes on and beyond the boundary shell).
fn validate_tail(t: f64, tail: i64) -> Result<()> {
    let boundary = (1.0 + (tail * tail) as f64).sqrt();
    if rho::rho_t(boundary, t) != 0.0 {
        return Err(CoreError::InvalidArgument(format!(
            "tail cut {tail} too small: cutoff profile nonzero at the boundary shell for t={t}"
        )));
    }
    Ok(())
}

/// Scale-flow first counterterm:
/// `sum_{m_chat} rho_t^2(<m_chat>)/<m_chat>^2` (finite support).
pub fn c1_bg(d: usize, t: f64, tail_cut: i64) -> Result<f64> {
    if t <= 0.0 {
        return Err(CoreError::InvalidArgument("scale t must be positive".into()));
    }
    validate_tail(t, tail_cut)?;
    let mut total = 0.0;
    lattice::for_each_box(d - 1, tail_cut, |v| {
        let h2 = 1.0 + v.iter().map(|&x| (x * x) as f64).sum::<f64>();
        let r = rho::rho_t(h2.sqrt(), t);
        total += r * r / h2;
    });
    Ok(total)
}

/// Scale-flow second counterterm: the melonic two-loop with smooth-cutoff
/// kernels,
///
/// ```text
/// 2 sum_{c' != c} int_1^t sum_v rho_s^2 sigma_s^2(<v>)/<v>^4
///     * sum_p [rho_s^2(<(p,w)>)/<(p,w)>^2 - rho_s^2(<p>)/<p>^2] ds
/// ```
///
/// with `w` the `c'` component of `v`; the s-integral is evaluated by
/// adaptive quadrature to 1e-10 absolute.
pub fn c2_bg(d: usize, t: f64, _c: Color, tail_cut: i64) -> Result<f64> {
    if t <= 0.0 {
        return Err(CoreError::InvalidArgument("scale t must be positive".into()));
    }
    validate_tail(t, tail_cut)?;
    if t <= 1.0 {
        return Ok(0.0);
    }
    let dim = d - 1;
    let hist = norm2_histogram(dim, tail_cut);
    let integrand = |s: f64| -> f64 {
        if s <= 1.0 {
            return 0.0;
        }
        let inner: Vec<f64> = (0..=tail_cut)
            .map(|w| {
                let w2 = (w * w) as f64;
                hist.iter()
                    .enumerate()
                    .map(|(p2, &cnt)| {
                        let a2 = 1.0 + p2 as f64 + w2;
                        let b2 = 1.0 + p2 as f64;
                        let ra = rho::rho_t(a2.sqrt(), s);
                        let rb = rho::rho_t(b2.sqrt(), s);
                        cnt * (ra * ra / a2 - rb * rb / b2)
                    })
                    .sum()
            })
            .collect();
        let mut level = 0.0;
        lattice::for_each_box(dim, tail_cut, |v| {
            let h2 = 1.0 + v.iter().map(|&x| (x * x) as f64).sum::<f64>();
            let h = h2.sqrt();
            let r = rho::rho_t(h, s);
            let sig2 = rho::sigma_t_sq(h, s);
            if r == 0.0 && sig2 == 0.0 {
                return;
            }
            let wt = r * r * sig2 / (h2 * h2);
            for &comp in v {
                level += wt * inner[comp.unsigned_abs() as usize];
            }
        });
        2.0 * level
    };
    quadrature::adaptive_simpson(&integrand, 1.0, t, 1e-10)
}

/// Fitted growth model for a counterterm sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    Constant,
    LogN,
    Linear,
}

/// Result of fitting counterterm values against `N`.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub model: RateModel,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// Successive-difference slopes against `ln N`.
    pub log_diff_slopes: Vec<f64>,
    /// Successive-difference slopes against `N`.
    pub lin_diff_slopes: Vec<f64>,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, residual)
}

/// Least-squares fit of `(N, value)` samples against constant, `ln N`, and
/// linear models; the best (smallest residual) model is reported together
/// with successive-difference slopes.
pub fn divergence_rate(samples: &[(i64, f64)]) -> Result<RateFit> {
    if samples.len() < 4 {
        return Err(CoreError::InvalidArgument(
            "divergence fit needs at least 4 samples".into(),
        ));
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CoreError::InvalidArgument(
            "divergence fit needs strictly increasing N".into(),
        ));
    }
    let ns: Vec<f64> = samples.iter().map(|&(n, _)| n as f64).collect();
    let vs: Vec<f64> = samples.iter().map(|&(_, v)| v).collect();
    let mean = vs.iter().sum::<f64>() / vs.len() as f64;
    let res_const = (vs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / vs.len() as f64).sqrt();
    let logs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let (slope_log, int_log, res_log) = least_squares(&logs, &vs);
    let (slope_lin, int_lin, res_lin) = least_squares(&ns, &vs);
    let log_diff_slopes = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / ((w[1].0 as f64).ln() - (w[0].0 as f64).ln()))
        .collect();
    let lin_diff_slopes = samples
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0) as f64)
        .collect();
    let (model, slope, intercept, residual) = if res_const <= res_log && res_const <= res_lin {
        (RateModel::Constant, 0.0, mean, res_const)
    } else if res_log <= res_lin {
        (RateModel::LogN, slope_log, int_log, res_log)
    } else {
        (RateModel::Linear, slope_lin, int_lin, res_lin)
    };
    Ok(RateFit {
        model,
        slope,
        intercept,
        residual,
        log_diff_slopes,
        lin_diff_slopes,
    })
}

/// Which cutoff a renormalization table was built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Sharp mode cutoff at `N`.
    Hard(i64),
    /// Scale-flow cutoff at scale `t`.
    Scale(f64),
}

/// Counterterm table for one `(d, cutoff)` pair.
#[derive(Debug, Clone)]
pub struct RenormTable {
    pub d: usize,
    pub cutoff: Cutoff,
    pub c1_per_color: Vec<f64>,
    pub c2_per_color: Vec<f64>,
    pub c1_total: f64,
    pub c2_total: f64,
}

impl RenormTable {
    /// Exact table for the hard cutoff.
    pub fn hard(d: usize, n: i64) -> Result<Self> {
        if !(2..=4).contains(&d) {
            return Err(CoreError::InvalidArgument(format!(
                "counterterms defined for d in 2..=4, got {d}"
            )));
        }
        if n < 0 {
            return Err(CoreError::InvalidArgument("negative cutoff".into()));
        }
        let c1v = c1(d, n);
        let c1_per_color = vec![c1v; d];
        let c2_per_color: Vec<f64> = (1..=d)
            .map(|c| c2(d, n, Color::new(c, d).unwrap()))
            .collect();
        Ok(RenormTable {
            d,
            cutoff: Cutoff::Hard(n),
            c1_total: c1_per_color.iter().sum(),
            c2_total: c2_per_color.iter().sum(),
            c1_per_color,
            c2_per_color,
        })
    }

    /// Table for the scale-flow cutoff at scale `t`.
    pub fn bg(d: usize, t: f64, tail_cut: i64) -> Result<Self> {
        if !(2..=4).contains(&d) {
            return Err(CoreError::InvalidArgument(format!(
                "counterterms defined for d in 2..=4, got {d}"
            )));
        }
        let c1v = c1_bg(d, t, tail_cut)?;
        let c1_per_color = vec![c1v; d];
        let c2_per_color: Vec<f64> = (1..=d)
            .map(|c| c2_bg(d, t, Color::new(c, d).unwrap(), tail_cut))
            .collect::<Result<_>>()?;
        Ok(RenormTable {
            d,
            cutoff: Cutoff::Scale(t),
            c1_total: c1_per_color.iter().sum(),
            c2_total: c2_per_color.iter().sum(),
            c1_per_color,
            c2_per_color,
        })
    }

    /// Smallest cubic cutoff whose lattice carries every mode the scale-`t`
    /// flow can populate (`<(N,0,..)> >= t`).
    pub fn effective_cutoff(t: f64) -> i64 {
        if t <= 1.0 {
            return 0;
        }
        (t * t - 1.0).sqrt().ceil() as i64
    }
}
