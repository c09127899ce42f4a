use serde::Serialize;

use crate::error::Result;
use crate::inertia::InertiaSpec;
use crate::spectral::PeriodicField;

use super::flow::FlowMap;

/// Monitored quantities at one output time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `μ(u)`
    pub mu_u: f64,
    /// `μ(m)`, `m = Au`
    pub mu_m: f64,
    /// `⟨u, u⟩_μ = μ(u)² + ∫ u_x²`
    pub energy_mu: f64,
    /// `⟨Au, u⟩_{L²}`
    pub energy_a: f64,
    pub linf_u: f64,
    /// `min ∂_ξ g`, when the flow map is tracked.
    pub min_gx: Option<f64>,
}

impl DiagnosticsRow {
    /// `momentum` is the operator `A` with `m = Au`.
    pub fn compute(t: f64, u: &PeriodicField, momentum: &InertiaSpec, flow: Option<&FlowMap>) -> Result<Self> {
        let m = momentum.apply(u)?;
        Ok(Self {
            t,
            mu_u: u.mean(),
            mu_m: m.mean(),
            energy_mu: u.inner_mu(u)?,
            energy_a: m.inner_l2(u)?,
            linf_u: u.linf_norm(),
            min_gx: flow.map(FlowMap::min_gx),
        })
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.mu_u, self.mu_m, self.energy_mu, self.energy_a, self.linf_u]
            .iter()
            .chain(self.min_gx.as_ref())
            .all(|v| v.is_finite())
    }
}

/// Largest relative deviation of a column from its first value,
/// `max |q(t) - q(0)| / max(|q(0)|, floor)`.
pub fn relative_drift(rows: &[DiagnosticsRow], column: impl Fn(&DiagnosticsRow) -> f64, floor: f64) -> f64 {
    let Some(first) = rows.first() else {
        return 0.0;
    };
    let q0 = column(first);
    let scale = q0.abs().max(floor);
    rows.iter()
        .map(|r| (column(r) - q0).abs() / scale)
        .fold(0.0, f64::max)
}
