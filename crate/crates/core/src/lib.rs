//! Pseudospectral solver and metric analyzer for the periodic μ-b family
//! of Euler equations on the diffeomorphism group of the circle.
//!
//! - [`spectral`]: periodic fields on `S¹ = ℝ/ℤ` and their Fourier calculus.
//! - [`inertia`]: inertia operators as Fourier multipliers, including the
//!   closed-form inverse of `L = μ - ∂²`.
//! - [`dynamics`]: Christoffel operator, Euler and μ-b right-hand sides,
//!   RK4 integration, flow maps and diagnostics.
//! - [`analyzer`]: the case analysis deciding when a μ-b equation is a
//!   metric Euler equation.

pub mod analyzer;
pub mod dynamics;
pub mod error;
pub mod inertia;
pub mod spectral;

pub use error::{Error, Result};
pub use inertia::{integral_inverse_deviation, invert_l_integral, InertiaSpec, MultiplierTable};
pub use spectral::{PeriodicField, Primitive, SpectralCoeffs, TrigSeries};
