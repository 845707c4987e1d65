//! Truncated Fourier mode lattices and color indexing.
//!
//! Modes live in the box `{-n_k..n_k}^d` (cubic in all production paths,
//! per-axis bounds allowed for small test lattices). Storage order is
//! lexicographic with axis 0 slowest, and the spectral weight is
//! `<m>^2 = 1 + |m|^2` with no 2-pi factors.

use crate::error::{CoreError, Result};

/// Maximum spatial dimension supported by lattice-backed computations.
pub const MAX_D: usize = 4;

/// A lattice mode. Only the first `d` entries are meaningful; the rest stay 0.
pub type Mode = [i64; MAX_D];

/// Interaction color, 1-based as in the trilinear kernel `N^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color(usize);

impl Color {
    /// Validates `1 <= c <= d`.
    pub fn new(c: usize, d: usize) -> Result<Self> {
        if c >= 1 && c <= d {
            Ok(Color(c))
        } else {
            Err(CoreError::InvalidColor { c, d })
        }
    }

    /// 1-based color index.
    pub fn get(self) -> usize {
        self.0
    }

    /// 0-based lattice axis the color acts on.
    pub fn axis(self) -> usize {
        self.0 - 1
    }
}

/// Truncated mode box `{-n_0..n_0} x ... x {-n_{d-1}..n_{d-1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeLattice {
    d: usize,
    n: [i64; MAX_D],
}

impl ModeLattice {
    /// Cubic lattice `{-n..n}^d`, the production configuration.
    pub fn cubic(d: usize, n: i64) -> Result<Self> {
        if !(1..=MAX_D).contains(&d) {
            return Err(CoreError::InvalidLattice(format!(
                "dimension {d} outside 1..={MAX_D}"
            )));
        }
        if n < 0 {
            return Err(CoreError::InvalidLattice(format!("negative cutoff {n}")));
        }
        let mut ns = [0i64; MAX_D];
        ns[..d].fill(n);
        Ok(ModeLattice { d, n: ns })
    }

    /// Per-axis bounds; used by small anisotropic test lattices.
    pub fn anisotropic(d: usize, bounds: &[i64]) -> Result<Self> {
        if !(1..=MAX_D).contains(&d) || bounds.len() != d {
            return Err(CoreError::InvalidLattice(format!(
                "dimension {d} with {} bounds",
                bounds.len()
            )));
        }
        if bounds.iter().any(|&b| b < 0) {
            return Err(CoreError::InvalidLattice("negative cutoff".into()));
        }
        let mut ns = [0i64; MAX_D];
        ns[..d].copy_from_slice(bounds);
        Ok(ModeLattice { d, n: ns })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Cutoff along axis `k`.
    pub fn bound(&self, k: usize) -> i64 {
        self.n[k]
    }

    /// Cutoff of a cubic lattice; errors if the bounds differ per axis.
    pub fn cutoff(&self) -> Result<i64> {
        let n0 = self.n[0];
        if self.n[..self.d].iter().all(|&b| b == n0) {
            Ok(n0)
        } else {
            Err(CoreError::InvalidLattice("lattice is not cubic".into()))
        }
    }

    /// Number of modes along axis `k`.
    pub fn side(&self, k: usize) -> usize {
        (2 * self.n[k] + 1) as usize
    }

    /// Total number of modes.
    pub fn len(&self) -> usize {
        (0..self.d).map(|k| self.side(k)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All colors `1..=d`.
    pub fn colors(&self) -> impl Iterator<Item = Color> {
        (1..=self.d).map(Color)
    }

    /// Whether `m` lies in the box (the sharp cutoff indicator).
    pub fn contains(&self, m: &Mode) -> bool {
        (0..self.d).all(|k| m[k].abs() <= self.n[k]) && m[self.d..].iter().all(|&x| x == 0)
    }

    /// Lexicographic storage index of a mode (axis 0 slowest).
    pub fn index(&self, m: &Mode) -> usize {
        debug_assert!(self.contains(m), "mode {m:?} outside lattice");
        let mut idx = 0usize;
        for k in 0..self.d {
            idx = idx * self.side(k) + (m[k] + self.n[k]) as usize;
        }
        idx
    }

    /// Inverse of [`Self::index`].
    pub fn mode(&self, mut idx: usize) -> Mode {
        debug_assert!(idx < self.len());
        let mut m = [0i64; MAX_D];
        for k in (0..self.d).rev() {
            let s = self.side(k);
            m[k] = (idx % s) as i64 - self.n[k];
            idx /= s;
        }
        m
    }

    /// Modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.len()).map(move |i| self.mode(i))
    }

    /// Storage index of `-m` given the index of `m`.
    ///
    /// Every axis range is symmetric, so reversing all axes reverses the
    /// flat storage order.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.len() - 1 - idx
    }
}

/// Spectral weight `<m>^2 = 1 + |m|^2`.
pub fn hat2(m: &Mode) -> f64 {
    1.0 + m.iter().map(|&x| (x * x) as f64).sum::<f64>()
}

/// Spectral weight `<m>` itself.
pub fn hat(m: &Mode) -> f64 {
    hat2(m).sqrt()
}

/// Negated mode.
pub fn neg(m: &Mode) -> Mode {
    let mut out = [0i64; MAX_D];
    for k in 0..MAX_D {
        out[k] = -m[k];
    }
    out
}

/// `m` with its color-`c` component replaced by `value` (the splice `chi^c`).
pub fn with_component(m: &Mode, c: Color, value: i64) -> Mode {
    let mut out = *m;
    out[c.axis()] = value;
    out
}

/// `m` with its color-`c` component zeroed (the hyperplane projection `m_chat`).
pub fn without_component(m: &Mode, c: Color) -> Mode {
    with_component(m, c, 0)
}

/// Applies `f` to every point of the box `{-n..n}^dim` (dim may be 0).
pub fn for_each_box(dim: usize, n: i64, mut f: impl FnMut(&[i64])) {
    let mut point = vec![0i64; dim];
    fn rec(k: usize, n: i64, point: &mut [i64], f: &mut impl FnMut(&[i64])) {
        if k == point.len() {
            f(point);
            return;
        }
        for v in -n..=n {
            point[k] = v;
            rec(k + 1, n, point, f);
        }
    }
    rec(0, n, &mut point, &mut f);
}
