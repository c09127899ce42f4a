//! Exact arithmetic on finite complex exponential sums `Σ c_j e^{2πijx}`.
//!
//! Used to replay the off-diagonal case, where the hypothetical inertia
//! operator couples two modes and so is not a Fourier multiplier.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeSeries {
    coeffs: BTreeMap<i64, Complex64>,
}

impl ModeSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c e^{2πijx}`
    pub fn mode(j: i64, c: Complex64) -> Self {
        let mut s = Self::zero();
        s.add_term(j, c);
        s
    }

    pub fn get(&self, j: i64) -> Complex64 {
        self.coeffs.get(&j).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, j: i64, c: Complex64) {
        *self.coeffs.entry(j).or_default() += c;
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&j, &c)| (j, c))
    }

    pub fn dx(&self) -> Self {
        self.map(|j, c| c * Complex64::new(0.0, 2.0 * PI * j as f64))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map(|_, c| c * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (j, c) in other.terms() {
            out.add_term(j, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Product of the two sums (full convolution, no truncation).
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                out.add_term(i + j, a * b);
            }
        }
        out
    }

    /// Applies an independent factor to each mode.
    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        Self {
            coeffs: self.terms().map(|(j, c)| (j, f(j, c))).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms()
            .map(|(j, c)| c * Complex64::from_polar(1.0, 2.0 * PI * j as f64 * x))
            .sum()
    }
}

/// An operator that is diagonal with symbol `diag(j)` except on mode
/// `source`, which it maps to `gamma e_target + diag(source) e_source`.
pub struct CoupledOperator<F: Fn(i64) -> f64> {
    pub source: i64,
    pub target: i64,
    pub gamma: Complex64,
    pub diag: F,
}

impl<F: Fn(i64) -> f64> CoupledOperator<F> {
    pub fn apply(&self, u: &ModeSeries) -> ModeSeries {
        let mut out = ModeSeries::zero();
        for (j, c) in u.terms() {
            out.add_term(j, c * (self.diag)(j));
            if j == self.source {
                out.add_term(self.target, c * self.gamma);
            }
        }
        out
    }

    /// Inverse on sums avoiding the coupled modes, where the operator is
    /// diagonal.
    pub fn invert(&self, f: &ModeSeries) -> Result<ModeSeries> {
        let mut out = ModeSeries::zero();
        for (j, c) in f.terms() {
            if c == Complex64::default() {
                continue;
            }
            if j == self.source || j == self.target {
                return Err(Error::OffDiagonalInverse(j));
            }
            out.add_term(j, c / (self.diag)(j));
        }
        Ok(out)
    }
}
