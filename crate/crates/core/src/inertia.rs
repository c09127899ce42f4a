//! Regular inertia operators as even Fourier multipliers.
//!
//! Every operator here acts diagonally, `c_k ↦ s_{|k|} c_k`, with a real
//! symbol indexed by `|k|`; realness and L²-symmetry hold by construction.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{check_grid, grid_points, PeriodicField, TrigSeries};

/// Mean tolerance (relative to `max(1, ‖f‖∞)`) for right-hand sides handed to
/// an operator whose symbol vanishes on constants.
pub const RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InertiaSpec {
    /// `L = μ - ∂²`: symbol 1 at `k = 0`, `(2πk)²` otherwise.
    MuMinusDxx,
    /// `1 - λ∂²`: symbol `1 + λ(2πk)²`. `λ = 0` is the identity (Burgers).
    OneMinusLambdaDxx { lambda: f64 },
    /// `-∂²`: symbol `(2πk)²`, singular on constants (Hunter-Saxton).
    MinusDxx,
    /// Explicit symbol `s_{|k|}` for `|k| = 0 ..= N/2`.
    DiagonalMultiplier { symbol: Vec<f64> },
    /// `factor · base`.
    Scaled { factor: f64, base: Box<InertiaSpec> },
}

impl InertiaSpec {
    pub fn identity() -> Self {
        InertiaSpec::OneMinusLambdaDxx { lambda: 0.0 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        InertiaSpec::Scaled {
            factor,
            base: Box::new(self),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InertiaSpec::MuMinusDxx | InertiaSpec::MinusDxx => Ok(()),
            InertiaSpec::OneMinusLambdaDxx { lambda } => {
                if lambda.is_finite() && *lambda >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidInertia(format!("lambda = {lambda} must be finite and >= 0")))
                }
            }
            InertiaSpec::DiagonalMultiplier { symbol } => {
                if symbol.is_empty() {
                    return Err(Error::InvalidInertia("empty symbol".into()));
                }
                match symbol.iter().find(|s| !s.is_finite()) {
                    Some(s) => Err(Error::InvalidInertia(format!("symbol entry {s} is not finite"))),
                    None => Ok(()),
                }
            }
            InertiaSpec::Scaled { factor, base } => {
                if !factor.is_finite() || *factor == 0.0 {
                    return Err(Error::InvalidInertia(format!("scale factor {factor} must be finite and nonzero")));
                }
                base.validate()
            }
        }
    }

    /// Symbol value `s_{|k|}`.
    pub fn symbol(&self, k: usize) -> Result<f64> {
        let n2 = (2.0 * PI * k as f64).powi(2);
        Ok(match self {
            InertiaSpec::MuMinusDxx => {
                if k == 0 {
                    1.0
                } else {
                    n2
                }
            }
            InertiaSpec::OneMinusLambdaDxx { lambda } => 1.0 + lambda * n2,
            InertiaSpec::MinusDxx => n2,
            InertiaSpec::DiagonalMultiplier { symbol } => {
                *symbol.get(k).ok_or(Error::SymbolTooShort {
                    len: symbol.len(),
                    needed: k + 1,
                })?
            }
            InertiaSpec::Scaled { factor, base } => factor * base.symbol(k)?,
        })
    }

    pub fn table(&self, n: usize) -> Result<MultiplierTable> {
        check_grid(n)?;
        self.validate()?;
        let values = (0..=n / 2).map(|k| self.symbol(k)).collect::<Result<Vec<_>>>()?;
        Ok(MultiplierTable { values })
    }

    /// `c_k ↦ s_{|k|} c_k`.
    pub fn apply(&self, u: &PeriodicField) -> Result<PeriodicField> {
        let table = self.table(u.n())?;
        Ok(u
            .transform()
            .map(|k, c| c * table.get(k))
            .inverse_transform())
    }

    /// `c_k ↦ c_k / s_{|k|}`. When `s_0 = 0` the input must be mean-free and
    /// the result is returned with zero mean.
    pub fn invert(&self, f: &PeriodicField) -> Result<PeriodicField> {
        let table = self.table(f.n())?;
        if let Some(k) = table.values.iter().skip(1).position(|&s| s == 0.0) {
            return Err(Error::NotInvertible { k: k + 1 });
        }
        let singular_mean = table.values[0] == 0.0;
        if singular_mean {
            let mean = f.mean();
            if mean.abs() > RANGE_TOL * f.linf_norm().max(1.0) {
                return Err(Error::NotInRange { mean });
            }
        }
        Ok(f.transform()
            .map(|k, c| {
                if k == 0 && singular_mean {
                    c * 0.0
                } else {
                    c / table.get(k)
                }
            })
            .inverse_transform())
    }

    /// Rescales so that `A𝟙 = 𝟙`.
    pub fn normalize(&self) -> Result<InertiaSpec> {
        self.validate()?;
        let s0 = self.symbol(0)?;
        if s0 == 0.0 {
            return Err(Error::NotNormalizable);
        }
        if s0 == 1.0 {
            return Ok(self.clone());
        }
        Ok(match self {
            InertiaSpec::DiagonalMultiplier { symbol } => InertiaSpec::DiagonalMultiplier {
                symbol: symbol.iter().map(|s| s / s0).collect(),
            },
            InertiaSpec::Scaled { factor, base } => {
                let factor = factor / s0;
                if factor == 1.0 {
                    (**base).clone()
                } else {
                    base.as_ref().clone().scaled(factor)
                }
            }
            other => other.clone().scaled(1.0 / s0),
        })
    }

    pub fn is_normalized(&self) -> bool {
        matches!(self.symbol(0), Ok(s) if s == 1.0)
    }

    /// Largest relative symmetry defect
    /// `|⟨Au,v⟩ - ⟨u,Av⟩| / (‖u‖ ‖v‖)` over seeded random pairs.
    pub fn check_symmetry(&self, n: usize, trials: usize, seed: u64) -> Result<f64> {
        check_grid(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_mode = (n / 3).max(1).min(n / 2 - 1);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let u = TrigSeries::random(max_mode, &mut rng).sample(n)?;
            let v = TrigSeries::random(max_mode, &mut rng).sample(n)?;
            let lhs = self.apply(&u)?.inner_l2(&v)?;
            let rhs = u.inner_l2(&self.apply(&v)?)?;
            let scale = (u.inner_l2(&u)? * v.inner_l2(&v)?).sqrt();
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        Ok(worst)
    }
}

/// Symbol values `s_0 ..= s_{N/2}` of an inertia operator at a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    values: Vec<f64>,
}

impl MultiplierTable {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: i64) -> f64 {
        self.values[k.unsigned_abs() as usize]
    }
}

/// Inverse of `L = μ - ∂²` through the closed-form nested-integral formula
///
/// ```text
/// (x²/2 - x/2 + 13/12) ∫₀¹u + (x - 1/2) ∫₀¹∫₀ᵃu - ∫₀ˣ∫₀ᵃu + ∫₀¹∫₀ᵃ∫₀ᵇu
/// ```
///
/// with every primitive evaluated coefficient-wise. Independent of the
/// spectral division in [`InertiaSpec::invert`].
pub fn invert_l_integral(f: &PeriodicField) -> PeriodicField {
    let first = f.antiderivative_from_zero();
    let second = first.antiderivative_from_zero();
    let third = second.antiderivative_from_zero();
    let total = f.mean();
    let double_total = second.eval_at_one();
    let triple_total = third.eval_at_one();
    let values = grid_points(f.n())
        .into_iter()
        .zip(second.samples())
        .map(|(x, inner)| {
            (0.5 * x * x - 0.5 * x + 13.0 / 12.0) * total + (x - 0.5) * double_total - inner + triple_total
        })
        .collect();
    PeriodicField::from_raw(values)
}

/// `max |invert_l_integral(f) - L⁻¹f|` over `trials` seeded random
/// trigonometric polynomials with modes `≤ max_mode`.
pub fn integral_inverse_deviation(n: usize, max_mode: usize, trials: usize, seed: u64) -> Result<f64> {
    check_grid(n)?;
    if max_mode >= n / 2 {
        return Err(Error::config("modes", format!("{max_mode} must be below N/2 = {}", n / 2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = InertiaSpec::MuMinusDxx;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = TrigSeries::random(max_mode, &mut rng).sample(n)?;
        worst = worst.max((&invert_l_integral(&f) - &l.invert(&f)?).linf_norm());
    }
    Ok(worst)
}
