//! Bracket, Christoffel operator, connection and the two right-hand sides.
//!
//! Bracket convention: `[u, v] = u v_x - u_x v`. Only the covariant
//! derivative depends on this sign; the Christoffel operator and therefore
//! the dynamics do not.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::inertia::InertiaSpec;
use crate::spectral::PeriodicField;

pub fn lie_bracket(u: &PeriodicField, v: &PeriodicField) -> Result<PeriodicField> {
    let a = u.product(&v.dx(), true)?;
    let b = u.dx().product(v, true)?;
    Ok(&a - &b)
}

/// `B(u, v) = ½ A⁻¹[2(Au)v_x + 2(Av)u_x + u(Av)_x + v(Au)_x]`.
pub fn christoffel(a: &InertiaSpec, u: &PeriodicField, v: &PeriodicField) -> Result<PeriodicField> {
    let au = a.apply(u)?;
    let av = a.apply(v)?;
    let terms = [
        au.product(&v.dx(), true)?.scale(2.0),
        av.product(&u.dx(), true)?.scale(2.0),
        u.product(&av.dx(), true)?,
        v.product(&au.dx(), true)?,
    ];
    let sum = terms[1..].iter().fold(terms[0].clone(), |acc, t| &acc + t);
    Ok(a.invert(&sum)?.scale(0.5))
}

/// `∇_u v = ½[u, v] + B(u, v)`.
pub fn covariant_derivative(a: &InertiaSpec, u: &PeriodicField, v: &PeriodicField) -> Result<PeriodicField> {
    let bracket = lie_bracket(u, v)?;
    Ok(&bracket.scale(0.5) + &christoffel(a, u, v)?)
}

/// Metric Euler right-hand side `u_t = -A⁻¹(2(Au)u_x + u(Au)_x) = -B(u, u)`.
pub fn euler_rhs(a: &InertiaSpec, u: &PeriodicField) -> Result<PeriodicField> {
    euler_rhs_with(a, u, true)
}

pub(crate) fn euler_rhs_with(a: &InertiaSpec, u: &PeriodicField, dealias: bool) -> Result<PeriodicField> {
    let au = a.apply(u)?;
    let w = &au.product(&u.dx(), dealias)?.scale(2.0) + &u.product(&au.dx(), dealias)?;
    Ok(-&a.invert(&w)?)
}

/// μ-b right-hand side solved for `u_t`:
/// `u_t = -L⁻¹((Lu)_x u + b (Lu) u_x)` with `L = μ - ∂²`.
pub fn mub_rhs(b: f64, u: &PeriodicField) -> Result<PeriodicField> {
    mub_rhs_with(b, u, true)
}

pub(crate) fn mub_rhs_with(b: f64, u: &PeriodicField, dealias: bool) -> Result<PeriodicField> {
    let l = InertiaSpec::MuMinusDxx;
    let m = l.apply(u)?;
    let w = &m.dx().product(u, dealias)? + &m.product(&u.dx(), dealias)?.scale(b);
    Ok(-&l.invert(&w)?)
}

/// Which evolution equation to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// `u_t = -B(u, u)` for the configured inertia operator.
    #[default]
    Euler,
    /// `m_t = -(m_x u + b m u_x)`, `m = μ(u) - u_xx`.
    Mub,
}

/// A concrete right-hand side: form plus its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Euler(InertiaSpec),
    MuB(f64),
}

impl Rhs {
    pub fn eval(&self, u: &PeriodicField, dealias: bool) -> Result<PeriodicField> {
        match self {
            Rhs::Euler(a) => euler_rhs_with(a, u, dealias),
            Rhs::MuB(b) => mub_rhs_with(*b, u, dealias),
        }
    }

    /// Operator mapping velocity to momentum for this equation.
    pub fn momentum_operator(&self) -> InertiaSpec {
        match self {
            Rhs::Euler(a) => a.clone(),
            Rhs::MuB(_) => InertiaSpec::MuMinusDxx,
        }
    }
}
