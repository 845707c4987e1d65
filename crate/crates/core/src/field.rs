//! Complex Fourier coefficient fields over a mode lattice.
//!
//! Real scalar fields are represented by Hermitian coefficient sets,
//! `coeff(-m) = conj(coeff(m))`; all evolution maps in the suite preserve
//! that symmetry, and I/O validates it.

use crate::error::{CoreError, Result};
use crate::lattice::{self, Mode, ModeLattice};
use crate::Complex64;

/// Dense coefficient field on a [`ModeLattice`], storage order lexicographic.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    lat: ModeLattice,
    a: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(lat: ModeLattice) -> Self {
        FourierField {
            lat,
            a: vec![Complex64::new(0.0, 0.0); lat.len()],
        }
    }

    /// Builds a field by evaluating `f` at every mode.
    pub fn from_fn(lat: ModeLattice, mut f: impl FnMut(&Mode) -> Complex64) -> Self {
        let a = lat.modes().map(|m| f(&m)).collect();
        FourierField { lat, a }
    }

    /// Wraps raw coefficients (must match the lattice length).
    pub fn from_vec(lat: ModeLattice, a: Vec<Complex64>) -> Result<Self> {
        if a.len() != lat.len() {
            return Err(CoreError::LatticeMismatch(format!(
                "{} coefficients for a lattice of {} modes",
                a.len(),
                lat.len()
            )));
        }
        Ok(FourierField { lat, a })
    }

    /// The constant field with value `alpha` (zero mode only).
    pub fn constant(lat: ModeLattice, alpha: f64) -> Self {
        let mut f = Self::zeros(lat);
        let zero = [0i64; lattice::MAX_D];
        let idx = lat.index(&zero);
        f.a[idx] = Complex64::new(alpha, 0.0);
        f
    }

    /// The real field `amp * (e_m + e_{-m})` (or `amp * e_0` if `m = 0`).
    pub fn hermitian_pair(lat: ModeLattice, m: &Mode, amp: f64) -> Self {
        let mut f = Self::zeros(lat);
        f.a[lat.index(m)] += Complex64::new(amp, 0.0);
        f.a[lat.index(&lattice::neg(m))] += Complex64::new(amp, 0.0);
        if *m == [0; lattice::MAX_D] {
            f.a[lat.index(m)] = Complex64::new(amp, 0.0);
        }
        f
    }

    pub fn lattice(&self) -> ModeLattice {
        self.lat
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn coeff(&self, m: &Mode) -> Complex64 {
        self.a[self.lat.index(m)]
    }

    /// Coefficient at `m`, or zero when `m` falls outside the lattice.
    pub fn coeff_or_zero(&self, m: &Mode) -> Complex64 {
        if self.lat.contains(m) {
            self.a[self.lat.index(m)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn coeff_mut(&mut self, m: &Mode) -> &mut Complex64 {
        let i = self.lat.index(m);
        &mut self.a[i]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.a
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.a
    }

    /// The coefficientwise reflection `m -> -m` (a flat reversal).
    pub fn reversed(&self) -> Self {
        let a = self.a.iter().rev().copied().collect();
        FourierField { lat: self.lat, a }
    }

    /// Largest `|coeff(-m) - conj(coeff(m))|` over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.a.len();
        let mut worst = 0.0f64;
        for i in 0..=n / 2 {
            let d = (self.a[n - 1 - i] - self.a[i].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Projects onto the Hermitian (real-field) subspace.
    pub fn hermitize(&mut self) {
        let n = self.a.len();
        for i in 0..n / 2 {
            let avg = 0.5 * (self.a[i] + self.a[n - 1 - i].conj());
            self.a[i] = avg;
            self.a[n - 1 - i] = avg.conj();
        }
        let mid = n / 2;
        self.a[mid] = Complex64::new(self.a[mid].re, 0.0);
    }

    /// `sum_m |u_m|^2`, the squared L2 norm under the normalized measure.
    pub fn l2_norm_sq(&self) -> f64 {
        self.a.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// The bilinear pairing `(u, v) = sum_m u_m v_{-m}` (real for real fields).
    pub fn l2_pairing(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.lat, other.lat);
        let n = self.a.len();
        self.a
            .iter()
            .enumerate()
            .map(|(i, z)| z * other.a[n - 1 - i])
            .sum()
    }

    /// `sum_m <m>^{2s} |u_m|^2`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        self.lat
            .modes()
            .enumerate()
            .map(|(i, m)| lattice::hat2(&m).powf(s) * self.a[i].norm_sqr())
            .sum()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// Applies the massive heat semigroup `exp(-t (1 - Laplace))`, `t >= 0`.
    pub fn heat_semigroup(&self, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(CoreError::InvalidArgument(format!(
                "heat semigroup needs t >= 0, got {t}"
            )));
        }
        Ok(self.mapped(|m, z| z * (-t * lattice::hat2(m)).exp()))
    }

    /// Applies a real Fourier multiplier `z_m -> factor(m) * z_m`.
    pub fn mapped(&self, mut factor: impl FnMut(&Mode, Complex64) -> Complex64) -> Self {
        let a = self
            .lat
            .modes()
            .enumerate()
            .map(|(i, m)| factor(&m, self.a[i]))
            .collect();
        FourierField { lat: self.lat, a }
    }

    /// Projects or zero-pads onto `target` (same dimension): the sharp
    /// cutoff `Pi_N` when shrinking, an embedding when growing.
    pub fn splice(&self, target: ModeLattice) -> Result<Self> {
        if target.d() != self.lat.d() {
            return Err(CoreError::LatticeMismatch(format!(
                "splice between d={} and d={}",
                self.lat.d(),
                target.d()
            )));
        }
        let mut out = Self::zeros(target);
        for (i, m) in target.modes().enumerate() {
            if self.lat.contains(&m) {
                out.a[i] = self.a[self.lat.index(&m)];
            }
        }
        Ok(out)
    }

    /// `self += c * other` (real scalar).
    pub fn add_scaled(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.lat, other.lat);
        for (z, w) in self.a.iter_mut().zip(&other.a) {
            *z += c * w;
        }
    }

    /// `c * self` (real scalar).
    pub fn scaled(&self, c: f64) -> Self {
        let a = self.a.iter().map(|z| c * z).collect();
        FourierField { lat: self.lat, a }
    }

    /// Coefficientwise sum.
    pub fn plus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.lat, other.lat);
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect();
        FourierField { lat: self.lat, a }
    }

    /// Coefficientwise difference.
    pub fn minus(&self, other: &Self) -> Self {
        debug_assert_eq!(self.lat, other.lat);
        let a = self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect();
        FourierField { lat: self.lat, a }
    }
}
