//! Periodic fields on the unit circle `S¹ = ℝ/ℤ` and their spectral calculus.
//!
//! A field is stored by its samples on the uniform grid `x_j = j/N`. Its
//! spectral view uses the convention
//!
//! ```text
//! u(x) = Σ_k c_k e^{2πikx},   k = -N/2 .. N/2-1,
//! ```
//!
//! so `c_0` is the mean `μ(u) = ∫ u dx` and mode `k` has physical wavenumber
//! `2πk`. The Nyquist coefficient `c_{-N/2}` of a real field is interpreted as
//! the real cosine `c_{-N/2} cos(πNx)`, i.e. split evenly between `±N/2`
//! whenever the continuous interpolant matters (off-grid evaluation,
//! antiderivatives, zero padding).

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT: `X_k = Σ_j x_j e^{-2πijk/n}`.
fn fft_forward(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Unnormalized inverse DFT: `x_j = Σ_k X_k e^{+2πijk/n}`.
fn fft_inverse(buf: &mut [Complex64]) {
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

pub fn check_grid(n: usize) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(n));
    }
    Ok(())
}

/// Grid points `x_j = j/N`.
pub fn grid_points(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / n as f64).collect()
}

fn mode_of_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Real-valued function on the circle sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    samples: Vec<f64>,
}

impl PeriodicField {
    /// Builds a field from grid samples. Rejects unsupported grids and
    /// non-finite samples.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        check_grid(samples.len())?;
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { samples })
    }

    /// Internal constructor for results of operations on valid fields. The
    /// samples may become non-finite during a diverging run; callers that care
    /// check [`PeriodicField::is_finite`].
    pub(crate) fn from_raw(samples: Vec<f64>) -> Self {
        debug_assert!(check_grid(samples.len()).is_ok());
        Self { samples }
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        check_grid(n)?;
        Self::new(vec![value; n])
    }

    /// Samples `f` at the grid points `j/n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n)?;
        Self::new((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn linf_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::GridMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// Discrete Fourier coefficients `c_k = (1/N) Σ_j u_j e^{-2πikj/N}`.
    pub fn transform(&self) -> SpectralCoeffs {
        let n = self.n();
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        SpectralCoeffs { data: buf }
    }

    /// `μ(u) = ∫_{S¹} u dx`, exact for trigonometric polynomials below Nyquist.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n() as f64
    }

    /// Spectral derivative of the given order: multiplies `c_k` by `(2πik)^order`.
    ///
    /// For odd orders the Nyquist mode is annihilated (its cosine interpolant
    /// differentiates to a sine that vanishes on the grid).
    pub fn derivative(&self, order: u32) -> PeriodicField {
        if order == 0 {
            return self.clone();
        }
        let n = self.n() as i64;
        self.transform()
            .map(|k, c| {
                if k == -n / 2 && order % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, 2.0 * PI * k as f64).powu(order)
                }
            })
            .inverse_transform()
    }

    pub fn dx(&self) -> PeriodicField {
        self.derivative(1)
    }

    /// Pointwise product. With `dealias` set, the product is formed on a
    /// zero-padded grid of `3N/2` points and truncated back, so that every
    /// retained mode `|k| < N/2` is exact; the Nyquist mode of the result is
    /// discarded.
    pub fn product(&self, other: &PeriodicField, dealias: bool) -> Result<PeriodicField> {
        self.check_same_grid(other)?;
        if !dealias {
            return Ok(PeriodicField::from_raw(
                self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect(),
            ));
        }
        let n = self.n();
        let m = 3 * n / 2;
        let pa = self.transform().padded_physical(m);
        let pb = other.transform().padded_physical(m);
        let mut buf: Vec<Complex64> = pa
            .iter()
            .zip(&pb)
            .map(|(a, b)| Complex64::new(a * b, 0.0))
            .collect();
        fft_forward(&mut buf);
        let scale = 1.0 / m as f64;
        let mut out = SpectralCoeffs::zeros_unchecked(n);
        for k in -(n as i64 / 2) + 1..(n as i64 / 2) {
            out.set(k, buf[k.rem_euclid(m as i64) as usize] * scale);
        }
        Ok(out.inverse_transform())
    }

    /// `⟨f, g⟩_{L²} = (1/N) Σ_j f_j g_j`.
    pub fn inner_l2(&self, other: &PeriodicField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.n() as f64)
    }

    /// `⟨f, g⟩_μ = μ(f)μ(g) + ∫ f_x g_x dx`.
    pub fn inner_mu(&self, other: &PeriodicField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.mean() * other.mean() + self.dx().inner_l2(&other.dx())?)
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        self.transform().eval(x)
    }

    /// `F(x) = ∫_0^x u`, computed exactly on the trigonometric interpolant.
    pub fn antiderivative_from_zero(&self) -> Primitive {
        Primitive::from_field(self).antiderivative_from_zero()
    }

    pub fn scale(&self, a: f64) -> PeriodicField {
        PeriodicField::from_raw(self.samples.iter().map(|v| a * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PeriodicField {
        PeriodicField::from_raw(self.samples.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn zip_with(&self, other: &PeriodicField, f: impl Fn(f64, f64) -> f64) -> PeriodicField {
        assert_eq!(self.n(), other.n(), "grid size mismatch");
        PeriodicField::from_raw(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

impl Add for &PeriodicField {
    type Output = PeriodicField;
    fn add(self, rhs: &PeriodicField) -> PeriodicField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &PeriodicField {
    type Output = PeriodicField;
    fn sub(self, rhs: &PeriodicField) -> PeriodicField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<&PeriodicField> for f64 {
    type Output = PeriodicField;
    fn mul(self, rhs: &PeriodicField) -> PeriodicField {
        rhs.scale(self)
    }
}

impl Neg for &PeriodicField {
    type Output = PeriodicField;
    fn neg(self) -> PeriodicField {
        self.scale(-1.0)
    }
}

/// Fourier coefficients of a field, `k = -N/2 .. N/2-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    // FFT ordering: 0, 1, .., N/2-1, -N/2, .., -1
    data: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid(n)?;
        Ok(Self::zeros_unchecked(n))
    }

    fn zeros_unchecked(n: usize) -> Self {
        Self {
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    pub fn min_mode(&self) -> i64 {
        -(self.n() as i64 / 2)
    }

    pub fn max_mode(&self) -> i64 {
        self.n() as i64 / 2 - 1
    }

    fn index(&self, k: i64) -> usize {
        assert!(
            k >= self.min_mode() && k <= self.max_mode(),
            "mode {k} outside {}..={}",
            self.min_mode(),
            self.max_mode()
        );
        k.rem_euclid(self.n() as i64) as usize
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.data[self.index(k)]
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        let i = self.index(k);
        self.data[i] = c;
    }

    /// Iterates `(k, c_k)` in FFT order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n();
        self.data
            .iter()
            .enumerate()
            .map(move |(i, &c)| (mode_of_index(i, n), c))
    }

    pub fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> SpectralCoeffs {
        let n = self.n();
        SpectralCoeffs {
            data: self
                .data
                .iter()
                .enumerate()
                .map(|(i, &c)| f(mode_of_index(i, n), c))
                .collect(),
        }
    }

    /// Synthesizes grid samples; the imaginary part (round-off for Hermitian
    /// input) is dropped.
    pub fn inverse_transform(&self) -> PeriodicField {
        let mut buf = self.data.clone();
        fft_inverse(&mut buf);
        PeriodicField::from_raw(buf.into_iter().map(|c| c.re).collect())
    }

    /// Largest violation of `c_{-k} = conj(c_k)`, including the realness of
    /// `c_0` and of the Nyquist coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let half = self.n() as i64 / 2;
        let mut defect = self.get(0).im.abs().max(self.get(-half).im.abs());
        for k in 1..half {
            defect = defect.max((self.get(-k) - self.get(k).conj()).norm());
        }
        defect
    }

    /// Largest `|c_k|` over modes with `|k| > k_max`.
    pub fn tail_beyond(&self, k_max: i64) -> f64 {
        self.iter()
            .filter(|(k, _)| k.abs() > k_max)
            .fold(0.0, |m, (_, c)| m.max(c.norm()))
    }

    /// `Σ_k |c_k|²`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Exact evaluation of the truncated real Fourier series at `x`,
    /// `O(N)` per point.
    pub fn eval(&self, x: f64) -> f64 {
        let half = self.n() as i64 / 2;
        let mut sum = self.get(0).re;
        let step = Complex64::cis(2.0 * PI * x);
        let mut z = Complex64::new(1.0, 0.0);
        for k in 1..half {
            // reseed the rotation periodically to bound recurrence drift
            z = if k % 32 == 0 {
                Complex64::cis(2.0 * PI * k as f64 * x)
            } else {
                z * step
            };
            sum += 2.0 * (self.get(k) * z).re;
        }
        sum + self.get(-half).re * (PI * self.n() as f64 * x).cos()
    }

    /// Physical samples on a finer grid of `m > N` points, the Nyquist
    /// coefficient split evenly between `±N/2`.
    fn padded_physical(&self, m: usize) -> Vec<f64> {
        let n = self.n();
        let half = n as i64 / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, c) in self.iter() {
            if k == -half {
                let c = 0.5 * c;
                buf[(-half).rem_euclid(m as i64) as usize] = c;
                buf[half as usize] = c;
            } else {
                buf[k.rem_euclid(m as i64) as usize] = c;
            }
        }
        fft_inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// A non-periodic primitive `P(x) + T(x)`: a polynomial in `x` plus a
/// mean-free trigonometric series over modes `-N/2 ..= N/2`. Repeated
/// antidifferentiation of a trigonometric polynomial stays in this class and
/// is carried out exactly on the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    /// Coefficients of `1, x, x², ...`.
    poly: Vec<f64>,
    /// Modes `-N/2 ..= N/2` stored at offset `N/2`; entry for `k = 0` is zero.
    modes: Vec<Complex64>,
}

impl Primitive {
    /// Represents a periodic field exactly (no integration).
    pub fn from_field(f: &PeriodicField) -> Self {
        let n = f.n();
        let half = n as i64 / 2;
        let c = f.transform();
        let mut modes = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, ck) in c.iter() {
            if k == -half {
                modes[0] = 0.5 * ck;
                modes[n] = 0.5 * ck;
            } else if k != 0 {
                modes[(k + half) as usize] = ck;
            }
        }
        Self {
            poly: vec![c.get(0).re],
            modes,
        }
    }

    pub fn n(&self) -> usize {
        self.modes.len() - 1
    }

    /// Polynomial part, coefficients of ascending powers of `x`.
    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    /// Coefficient of `x`; for a first antiderivative of a field this is its mean.
    pub fn linear_coefficient(&self) -> f64 {
        self.poly.get(1).copied().unwrap_or(0.0)
    }

    fn modes_iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let half = self.n() as i64 / 2;
        self.modes
            .iter()
            .enumerate()
            .map(move |(i, &c)| (i as i64 - half, c))
    }

    /// `∫_0^x` of this function.
    pub fn antiderivative_from_zero(&self) -> Primitive {
        let mut poly = Vec::with_capacity(self.poly.len() + 1);
        poly.push(0.0);
        poly.extend(self.poly.iter().enumerate().map(|(j, a)| a / (j as f64 + 1.0)));
        // c_k e^{2πikx} integrates to d_k (e^{2πikx} - 1), d_k = c_k / (2πik)
        let modes: Vec<Complex64> = self
            .modes_iter()
            .map(|(k, c)| {
                if k == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    c / Complex64::new(0.0, 2.0 * PI * k as f64)
                }
            })
            .collect();
        poly[0] -= modes.iter().map(|d| d.re).sum::<f64>();
        Primitive { poly, modes }
    }

    fn poly_at(&self, x: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, a| acc * x + a)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let periodic: f64 = self
            .modes_iter()
            .map(|(k, c)| (c * Complex64::cis(2.0 * PI * k as f64 * x)).re)
            .sum();
        self.poly_at(x) + periodic
    }

    /// Value at `x = 1`, where every Fourier mode equals its value at 0.
    pub fn eval_at_one(&self) -> f64 {
        self.poly.iter().sum::<f64>() + self.modes.iter().map(|c| c.re).sum::<f64>()
    }

    /// Samples at the grid points `j/N`.
    pub fn samples(&self) -> Vec<f64> {
        let n = self.n();
        let half = n as i64 / 2;
        let mut folded = SpectralCoeffs::zeros_unchecked(n);
        for (k, c) in self.modes_iter() {
            if k == half {
                // e^{iπN x_j} = e^{-iπN x_j} on the grid
                let prev = folded.get(-half);
                folded.set(-half, prev + c);
            } else {
                folded.set(k, folded.get(k) + c);
            }
        }
        let periodic = folded.inverse_transform();
        grid_points(n)
            .into_iter()
            .zip(periodic.samples())
            .map(|(x, p)| self.poly_at(x) + p)
            .collect()
    }
}

/// Real trigonometric polynomial
/// `Σ_{k≥0} cos[k] cos(2πkx) + Σ_{k≥1} sin[k-1] sin(2πkx)`.
///
/// `cos[0]` is the constant term; `sin` starts at mode 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigSeries {
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigSeries {
    /// Random coefficients uniform in `[-1, 1]` on modes `0..=max_mode`.
    pub fn random<R: Rng + ?Sized>(max_mode: usize, rng: &mut R) -> Self {
        Self {
            cos: (0..=max_mode).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            sin: (0..max_mode).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
        }
    }

    /// Random coefficients with zero constant term.
    pub fn random_mean_free<R: Rng + ?Sized>(max_mode: usize, rng: &mut R) -> Self {
        let mut s = Self::random(max_mode, rng);
        s.cos[0] = 0.0;
        s
    }

    /// Highest mode with a nonzero coefficient (0 for constants).
    pub fn max_mode(&self) -> usize {
        let c = self.cos.iter().rposition(|&a| a != 0.0).unwrap_or(0);
        let s = self.sin.iter().rposition(|&a| a != 0.0).map_or(0, |i| i + 1);
        c.max(s)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c: f64 = self
            .cos
            .iter()
            .enumerate()
            .map(|(k, a)| a * (2.0 * PI * k as f64 * x).cos())
            .sum();
        let s: f64 = self
            .sin
            .iter()
            .enumerate()
            .map(|(i, b)| b * (2.0 * PI * (i + 1) as f64 * x).sin())
            .sum();
        c + s
    }

    /// Samples the series on an `n`-point grid through its coefficients; all
    /// modes must lie strictly below Nyquist.
    pub fn sample(&self, n: usize) -> Result<PeriodicField> {
        check_grid(n)?;
        if self.max_mode() >= n / 2 {
            return Err(Error::config(
                "initial",
                format!("mode {} does not fit below Nyquist of N = {n}", self.max_mode()),
            ));
        }
        if let Some(v) = self.cos.iter().chain(&self.sin).find(|v| !v.is_finite()) {
            return Err(Error::config("initial", format!("coefficient {v} is not finite")));
        }
        let mut c = SpectralCoeffs::zeros_unchecked(n);
        for (k, &a) in self.cos.iter().enumerate().take(n / 2) {
            if k == 0 {
                c.set(0, Complex64::new(a, 0.0));
            } else {
                let k = k as i64;
                c.set(k, c.get(k) + 0.5 * a);
                c.set(-k, c.get(-k) + 0.5 * a);
            }
        }
        for (i, &b) in self.sin.iter().enumerate().take(n / 2 - 1) {
            let k = i as i64 + 1;
            c.set(k, c.get(k) + Complex64::new(0.0, -0.5 * b));
            c.set(-k, c.get(-k) + Complex64::new(0.0, 0.5 * b));
        }
        Ok(c.inverse_transform())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sin1(n: usize) -> PeriodicField {
        PeriodicField::from_fn(n, |x| (2.0 * PI * x).sin()).unwrap()
    }

    fn cos1(n: usize) -> PeriodicField {
        PeriodicField::from_fn(n, |x| (2.0 * PI * x).cos()).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rejects_bad_grids_and_non_finite_samples() {
        assert_eq!(PeriodicField::new(vec![0.0; 3]), Err(Error::InvalidGrid(3)));
        assert_eq!(PeriodicField::new(vec![0.0; 2]), Err(Error::InvalidGrid(2)));
        let err = PeriodicField::new(vec![0.0, 1.0, f64::NAN, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 2, .. }));
        assert!(PeriodicField::new(vec![f64::INFINITY; 4]).is_err());
    }

    #[test]
    fn constant_transforms_to_mean_only() {
        let c = PeriodicField::constant(16, 1.0).unwrap().transform();
        assert!((c.get(0).re - 1.0).abs() < 1e-15);
        for (k, ck) in c.iter() {
            if k != 0 {
                assert!(ck.norm() < 1e-15, "mode {k}: {ck}");
            }
        }
    }

    #[test]
    fn cosine_has_half_weights_on_unit_modes() {
        let c = cos1(8).transform();
        assert!((c.get(1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((c.get(-1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(c.tail_beyond(1) < 1e-15);
        assert!(c.get(0).norm() < 1e-15);
    }

    #[test]
    fn round_trip_on_random_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = PeriodicField::new((0..64).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let back = f.transform().inverse_transform();
        assert!(max_diff(f.samples(), back.samples()) <= 1e-12);
        assert!(f.transform().hermitian_defect() < 1e-15);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(PeriodicField::constant(8, 1.0).unwrap().mean(), 1.0);
        assert!(sin1(64).mean().abs() < 1e-15);
        // trapezoid quadrature on a fine grid agrees with the discrete mean
        let f = |x: f64| 0.3 + 0.2 * (4.0 * PI * x).cos();
        let field = PeriodicField::from_fn(256, f).unwrap();
        let m = 20_000;
        let quad: f64 = (0..m).map(|j| f(j as f64 / m as f64)).sum::<f64>() / m as f64;
        assert!((field.mean() - quad).abs() < 1e-12);
        assert!((field.mean() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_single_modes() {
        let n = 32;
        let d1 = sin1(n).derivative(1);
        let expect = cos1(n).scale(2.0 * PI);
        assert!(max_diff(d1.samples(), expect.samples()) < 1e-12);
        let d2 = cos1(n).derivative(2);
        let expect = cos1(n).scale(-(2.0 * PI).powi(2));
        assert!(max_diff(d2.samples(), expect.samples()) < 1e-11);
        let d3 = sin1(n).derivative(3);
        let expect = cos1(n).scale(-(2.0 * PI).powi(3));
        assert!(max_diff(d3.samples(), expect.samples()) < 1e-10);
    }

    #[test]
    fn derivative_matches_centered_differences_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let series = TrigSeries::random(4, &mut rng);
        let err_at = |n: usize| {
            let f = series.sample(n).unwrap();
            let h = 1.0 / n as f64;
            let exact = f.dx();
            let s = f.samples();
            (0..n)
                .map(|j| {
                    let fd = (s[(j + 1) % n] - s[(j + n - 1) % n]) / (2.0 * h);
                    (fd - exact.samples()[j]).abs()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err_at(64);
        let e2 = err_at(128);
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn derivative_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = TrigSeries::random(10, &mut rng).sample(64).unwrap();
        assert!(f.dx().transform().get(0).norm() < 1e-14);
    }

    #[test]
    fn product_examples() {
        let one = PeriodicField::constant(8, 1.0).unwrap();
        let p = one.product(&one, true).unwrap();
        assert!(max_diff(p.samples(), one.samples()) < 1e-15);

        for n in [8, 16, 64] {
            let p = sin1(n).product(&cos1(n), true).unwrap();
            let expect = PeriodicField::from_fn(n, |x| 0.5 * (4.0 * PI * x).sin()).unwrap();
            assert!(max_diff(p.samples(), expect.samples()) < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn product_rejects_mismatched_grids() {
        let err = sin1(8).product(&sin1(16), true).unwrap_err();
        assert_eq!(err, Error::GridMismatch { left: 8, right: 16 });
        assert!(sin1(8).inner_l2(&sin1(16)).is_err());
    }

    /// Direct convolution of coefficient arrays, truncated to `|k| < N/2`.
    fn convolution_oracle(f: &PeriodicField, g: &PeriodicField) -> SpectralCoeffs {
        let (cf, cg) = (f.transform(), g.transform());
        let n = f.n() as i64;
        let mut out = SpectralCoeffs::zeros(f.n()).unwrap();
        for (a, ca) in cf.iter() {
            for (b, cb) in cg.iter() {
                if a == -n / 2 || b == -n / 2 {
                    continue;
                }
                let k = a + b;
                if k.abs() < n / 2 {
                    out.set(k, out.get(k) + ca * cb);
                }
            }
        }
        out
    }

    #[test]
    fn dealiased_product_is_the_truncated_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 48;
        let f = TrigSeries::random(n / 3, &mut rng).sample(n).unwrap();
        let g = TrigSeries::random(n / 3, &mut rng).sample(n).unwrap();
        let p = f.product(&g, true).unwrap().transform();
        let oracle = convolution_oracle(&f, &g);
        for (k, c) in p.iter() {
            assert!((c - oracle.get(k)).norm() < 1e-13, "mode {k}");
        }
    }

    #[test]
    fn dealiased_and_plain_agree_without_aliasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 64;
        // combined bandwidth stays below Nyquist
        let f = TrigSeries::random(15, &mut rng).sample(n).unwrap();
        let g = TrigSeries::random(15, &mut rng).sample(n).unwrap();
        let d = f.product(&g, true).unwrap();
        let plain = f.product(&g, false).unwrap();
        assert!(max_diff(d.samples(), plain.samples()) < 1e-12);
        assert!(d.transform().tail_beyond(30) < 1e-13);
    }

    #[test]
    fn inner_products() {
        let one = PeriodicField::constant(16, 1.0).unwrap();
        assert!((one.inner_mu(&one).unwrap() - 1.0).abs() < 1e-15);
        let s = sin1(64);
        // quadrature oracle for ∫ (2π cos 2πx)² dx
        let m = 10_000;
        let quad: f64 = (0..m)
            .map(|j| (2.0 * PI * (2.0 * PI * j as f64 / m as f64).cos()).powi(2))
            .sum::<f64>()
            / m as f64;
        assert!((s.inner_mu(&s).unwrap() - quad).abs() < 1e-10);
        assert!((quad - 19.739208802178716).abs() < 1e-10);
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = PeriodicField::new((0..128).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let l2 = f.inner_l2(&f).unwrap();
        assert!((l2 - f.transform().energy()).abs() <= 1e-12 * l2);
    }

    #[test]
    fn antiderivative_examples() {
        let n = 32;
        let grid = grid_points(n);
        let one = PeriodicField::constant(n, 1.0).unwrap().antiderivative_from_zero();
        assert!(max_diff(&one.samples(), &grid) < 1e-15);
        assert_eq!(one.linear_coefficient(), 1.0);

        let c = cos1(n).antiderivative_from_zero();
        let expect: Vec<f64> = grid.iter().map(|x| (2.0 * PI * x).sin() / (2.0 * PI)).collect();
        assert!(max_diff(&c.samples(), &expect) < 1e-15);

        let s = sin1(n).antiderivative_from_zero();
        let expect: Vec<f64> = grid.iter().map(|x| (1.0 - (2.0 * PI * x).cos()) / (2.0 * PI)).collect();
        assert!(max_diff(&s.samples(), &expect) < 1e-15);
        assert!(s.eval_at_one().abs() < 1e-15);
        // midpoint-rule quadrature oracle at an off-grid point
        let x = 0.37;
        let m = 20_000;
        let quad: f64 = (0..m)
            .map(|j| (2.0 * PI * (j as f64 + 0.5) * x / m as f64).sin())
            .sum::<f64>()
            * x
            / m as f64;
        assert!((s.eval(x) - quad).abs() < 1e-9);
    }

    #[test]
    fn nested_antiderivatives_of_nyquist_mode() {
        // cos(πNx) integrates twice to -cos(πNx)/(πN)² + const
        let n = 8;
        let f = PeriodicField::from_fn(n, |x| (PI * n as f64 * x).cos()).unwrap();
        let f2 = f.antiderivative_from_zero().antiderivative_from_zero();
        let k = PI * n as f64;
        let expect: Vec<f64> = grid_points(n)
            .iter()
            .map(|x| (1.0 - (k * x).cos()) / (k * k))
            .collect();
        assert!(max_diff(&f2.samples(), &expect) < 1e-15);
    }

    #[test]
    fn off_grid_evaluation_is_exact_for_trig_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let series = TrigSeries::random(40, &mut rng);
        let f = series.sample(128).unwrap();
        let c = f.transform();
        for x in [0.0, 0.013, 0.5, 0.77777, 0.999] {
            assert!((c.eval(x) - series.eval(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn trig_series_sampling_rejects_modes_at_nyquist() {
        let s = TrigSeries {
            cos: vec![0.0, 0.0, 0.0, 0.0, 1.0],
            sin: vec![],
        };
        assert!(s.sample(8).is_err());
        assert!(s.sample(16).is_ok());
        assert_eq!(s.max_mode(), 4);
    }
}
