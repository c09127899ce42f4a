//! Lagrangian flow map `g(t)` on the circle, `ġ(t, ξ) = u(t, g(t, ξ))`,
//! `g(0) = id`.
//!
//! Positions are stored lifted to ℝ (no reduction mod 1), so `g - id` is a
//! periodic function of the label `ξ`.

use crate::error::{Error, Result};
use crate::spectral::{grid_points, PeriodicField, SpectralCoeffs};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    pub t: f64,
    /// Particle positions `g(t, ξ_j)` for labels `ξ_j = j/N`.
    pub g: Vec<f64>,
    /// Spatial derivative `∂_ξ g`.
    pub g_x: Vec<f64>,
}

impl FlowMap {
    pub fn identity(n: usize) -> Self {
        Self::from_positions(0.0, grid_points(n))
    }

    /// Builds the map and its derivative `1 + ∂_ξ(g - id)` (spectral).
    pub fn from_positions(t: f64, g: Vec<f64>) -> Self {
        let n = g.len();
        let displacement: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(j, gj)| gj - j as f64 / n as f64)
            .collect();
        let g_x = PeriodicField::from_raw(displacement)
            .dx()
            .samples()
            .iter()
            .map(|d| 1.0 + d)
            .collect();
        Self { t, g, g_x }
    }

    pub fn min_gx(&self) -> f64 {
        self.g_x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_diffeomorphism(&self) -> bool {
        self.min_gx() > 0.0
    }

    /// Number of turns the particle ring makes around the circle, counted
    /// from positions reduced mod 1.
    pub fn winding_number(&self) -> i64 {
        let n = self.g.len();
        let wrapped: Vec<f64> = self.g.iter().map(|x| x.rem_euclid(1.0)).collect();
        let turns: f64 = (0..n)
            .map(|j| {
                let d = wrapped[(j + 1) % n] - wrapped[j];
                // increments below half a turn are unambiguous
                d - d.round()
            })
            .sum();
        turns.round() as i64
    }
}

/// Evaluates the velocity with coefficients `c` at every particle position.
pub(crate) fn velocity_at(c: &SpectralCoeffs, positions: &[f64]) -> Vec<f64> {
    positions.iter().map(|&x| c.eval(x)).collect()
}

/// Reconstructs the flow from velocities sampled at half steps
/// `t = 0, dt/2, dt, 3dt/2, ...` (classical RK4 per particle).
///
/// Returns one map per full step, starting with the identity at `t = 0`.
pub fn reconstruct_flow(u_series: &[PeriodicField], dt: f64) -> Result<Vec<FlowMap>> {
    let Some(first) = u_series.first() else {
        return Ok(Vec::new());
    };
    if u_series.len().is_multiple_of(2) {
        return Err(Error::config(
            "u_series",
            "expected an odd number of half-step samples",
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config("dt", "must be positive"));
    }
    let n = first.n();
    let coeffs: Vec<SpectralCoeffs> = u_series.iter().map(|u| u.transform()).collect();
    let mut maps = vec![FlowMap::identity(n)];
    let mut g = grid_points(n);
    for (step, window) in coeffs.windows(3).step_by(2).enumerate() {
        let [c0, ch, c1] = window else { unreachable!() };
        let k1 = velocity_at(c0, &g);
        let y2: Vec<f64> = g.iter().zip(&k1).map(|(x, k)| x + 0.5 * dt * k).collect();
        let k2 = velocity_at(ch, &y2);
        let y3: Vec<f64> = g.iter().zip(&k2).map(|(x, k)| x + 0.5 * dt * k).collect();
        let k3 = velocity_at(ch, &y3);
        let y4: Vec<f64> = g.iter().zip(&k3).map(|(x, k)| x + dt * k).collect();
        let k4 = velocity_at(c1, &y4);
        for (j, x) in g.iter_mut().enumerate() {
            *x += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let map = FlowMap::from_positions((step + 1) as f64 * dt, g.clone());
        if !map.is_diffeomorphism() {
            return Err(Error::DiffeomorphismLost {
                t: map.t,
                min_gx: map.min_gx(),
            });
        }
        maps.push(map);
    }
    Ok(maps)
}

/// Five-point first-derivative weights (times `12h`) at offset `j` within
/// a stencil of five equally spaced samples.
const FIVE_POINT: [[f64; 5]; 5] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// `max_ξ |ġ - u∘g|` at stencil position `offset`, with `ġ` from a
/// fourth-order finite difference over five consecutive flow samples.
pub(crate) fn flow_residual(window: &[&[f64]; 5], offset: usize, h: f64, u: &SpectralCoeffs) -> f64 {
    let w = FIVE_POINT[offset];
    let g = window[offset];
    (0..g.len())
        .map(|i| {
            let gdot: f64 = (0..5).map(|s| w[s] * window[s][i]).sum::<f64>() / (12.0 * h);
            (gdot - u.eval(g[i])).abs()
        })
        .fold(0.0, f64::max)
}
