//! Fixed-step RK4 time integration and the configuration-driven run loop.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inertia::InertiaSpec;
use crate::spectral::{grid_points, PeriodicField, SpectralCoeffs, TrigSeries};

use super::diagnostics::DiagnosticsRow;
use super::flow::{flow_residual, velocity_at, FlowMap};
use super::operators::{Form, Rhs};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    /// Eulerian velocity.
    pub u: PeriodicField,
    /// Momentum `m = Au`, when tracked.
    pub m: Option<PeriodicField>,
}

impl SimulationState {
    pub fn new(t: f64, u: PeriodicField) -> Self {
        Self { t, u, m: None }
    }

    pub fn with_momentum(mut self, a: &InertiaSpec) -> Result<Self> {
        self.m = Some(a.apply(&self.u)?);
        Ok(self)
    }
}

/// Classical four-stage Runge-Kutta step on a flat state vector.
pub(crate) fn rk4_vec<F>(y: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let shifted = |base: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    let k1 = f(y)?;
    let k2 = f(&shifted(y, &k1, 0.5 * dt))?;
    let k3 = f(&shifted(y, &k2, 0.5 * dt))?;
    let k4 = f(&shifted(y, &k3, dt))?;
    Ok((0..y.len())
        .map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// One RK4 step of `u_t = rhs(u)`. The momentum of the result is not
/// filled in.
pub fn step_rk4<F>(mut rhs: F, state: &SimulationState, dt: f64) -> Result<SimulationState>
where
    F: FnMut(&PeriodicField) -> Result<PeriodicField>,
{
    let u = rk4_vec(state.u.samples(), dt, |y| {
        Ok(rhs(&PeriodicField::from_raw(y.to_vec()))?.into_samples())
    })?;
    Ok(SimulationState::new(state.t + dt, PeriodicField::from_raw(u)))
}

/// Named initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `cos(2πx)`
    Cos1,
    /// `0.2 cos(2πx) + 0.1`
    Mucauchy,
}

impl Preset {
    pub fn series(self) -> TrigSeries {
        match self {
            Preset::Cos1 => TrigSeries {
                cos: vec![0.0, 1.0],
                sin: vec![],
            },
            Preset::Mucauchy => TrigSeries {
                cos: vec![0.1, 0.2],
                sin: vec![],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigTag {
    Trig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCondition {
    Preset(Preset),
    Trig {
        #[serde(rename = "type")]
        tag: TrigTag,
        #[serde(flatten)]
        series: TrigSeries,
    },
}

impl InitialCondition {
    pub fn trig(series: TrigSeries) -> Self {
        InitialCondition::Trig {
            tag: TrigTag::Trig,
            series,
        }
    }

    pub fn series(&self) -> TrigSeries {
        match self {
            InitialCondition::Preset(p) => p.series(),
            InitialCondition::Trig { series, .. } => series.clone(),
        }
    }
}

fn default_b() -> f64 {
    2.0
}
fn default_inertia() -> InertiaSpec {
    InertiaSpec::MuMinusDxx
}
fn default_n() -> usize {
    256
}
fn default_output_every() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_blowup() -> f64 {
    1e3
}

/// Everything needed for one run. All quantities use the period-1 convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "default_inertia")]
    pub inertia: InertiaSpec,
    #[serde(rename = "N", alias = "n", default = "default_n")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    pub initial: InitialCondition,
    #[serde(default)]
    pub form: Form,
    #[serde(default)]
    pub track_flow: bool,
    /// Keep `u` (and `g`) at every output time.
    #[serde(default)]
    pub snapshots: bool,
}

impl SimulationConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(inertia: InertiaSpec, initial: InitialCondition, n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            b: default_b(),
            inertia,
            n,
            dt,
            t_end,
            output_every: default_output_every(),
            dealias: true,
            blowup_threshold: default_blowup(),
            initial,
            form: Form::Euler,
            track_flow: false,
            snapshots: false,
        }
    }

    pub fn mub(b: f64, initial: InitialCondition, n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            b,
            form: Form::Mub,
            ..Self::new(InertiaSpec::MuMinusDxx, initial, n, dt, t_end)
        }
    }

    pub fn rhs(&self) -> Rhs {
        match self.form {
            Form::Euler => Rhs::Euler(self.inertia.clone()),
            Form::Mub => Rhs::MuB(self.b),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return Err(Error::config("N", format!("{} must be even and >= 8", self.n)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config("t_end", format!("{} must be positive", self.t_end)));
        }
        let steps = self.steps();
        if steps == 0 || (steps as f64 * self.dt - self.t_end).abs() > 1e-9 * self.t_end {
            return Err(Error::config(
                "t_end",
                format!("{} is not an integer multiple of dt = {}", self.t_end, self.dt),
            ));
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every", "must be at least 1"));
        }
        if !(self.blowup_threshold.is_finite() && self.blowup_threshold > 0.0) {
            return Err(Error::config("blowup_threshold", "must be positive"));
        }
        if !self.b.is_finite() {
            return Err(Error::config("b", "must be finite"));
        }
        self.inertia
            .table(self.n)
            .map_err(|e| Error::config("inertia", e.to_string()))?;
        if self.form == Form::Mub && self.inertia != InertiaSpec::MuMinusDxx {
            return Err(Error::config(
                "inertia",
                "the mub form has momentum mu(u) - u_xx; use mu_minus_dxx",
            ));
        }
        let series = self.initial.series();
        let u0 = series.sample(self.n)?;
        if self.dealias && 3 * series.max_mode() > self.n {
            return Err(Error::config(
                "initial",
                format!("mode {} exceeds N/3 = {} with dealiasing on", series.max_mode(), self.n / 3),
            ));
        }
        let singular = self.form == Form::Euler && self.inertia.symbol(0)? == 0.0;
        if singular && u0.mean().abs() > 1e-12 {
            return Err(Error::config(
                "initial",
                "inertia operator vanishes on constants; initial data must have zero mean",
            ));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowupSuspected { t: f64, reason: String },
    DiffeomorphismLost { t: f64, min_gx: f64 },
}

impl RunStatus {
    pub fn is_healthy(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: PeriodicField,
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub rows: Vec<DiagnosticsRow>,
    pub snapshots: Vec<Snapshot>,
    /// `(t, max_ξ |ġ - u∘g|)` at output times, when the flow is tracked.
    pub flow_residuals: Vec<(f64, f64)>,
    pub status: RunStatus,
    pub steps_taken: usize,
}

impl SimulationOutput {
    pub fn max_flow_residual(&self) -> Option<f64> {
        self.flow_residuals
            .iter()
            .map(|&(_, r)| r)
            .reduce(f64::max)
    }

    pub fn final_u(&self) -> Option<&PeriodicField> {
        self.snapshots.last().map(|s| &s.u)
    }
}

struct WindowEntry {
    step: usize,
    g: Vec<f64>,
    u: SpectralCoeffs,
}

/// Sliding five-step window used to check `ġ = u∘g` at output steps.
struct ResidualTracker {
    window: VecDeque<WindowEntry>,
    pending: VecDeque<usize>,
    dt: f64,
    residuals: Vec<(f64, f64)>,
}

impl ResidualTracker {
    fn new(dt: f64) -> Self {
        Self {
            window: VecDeque::with_capacity(5),
            pending: VecDeque::new(),
            dt,
            residuals: Vec::new(),
        }
    }

    fn push(&mut self, step: usize, u: &PeriodicField, g: &[f64], is_output: bool) {
        if self.window.len() == 5 {
            self.window.pop_front();
        }
        self.window.push_back(WindowEntry {
            step,
            g: g.to_vec(),
            u: u.transform(),
        });
        if is_output {
            self.pending.push_back(step);
        }
        while let Some(&m) = self.pending.front() {
            if step < 4 || step < m + 2 {
                break;
            }
            self.resolve(m);
            self.pending.pop_front();
        }
    }

    /// Resolves every pending step with the current window (end of run).
    fn finish(&mut self) {
        while let Some(m) = self.pending.pop_front() {
            if self.window.len() == 5 {
                self.resolve(m);
            }
        }
    }

    fn resolve(&mut self, m: usize) {
        let start = self.window[0].step;
        let offset = m - start;
        let gs: [&[f64]; 5] = std::array::from_fn(|i| self.window[i].g.as_slice());
        let r = flow_residual(&gs, offset, self.dt, &self.window[offset].u);
        self.residuals.push((m as f64 * self.dt, r));
    }
}

/// Runs a configured simulation to `t_end` or until the run is flagged.
///
/// Diagnostics are emitted at step 0, every `output_every` steps and at the
/// final step. A run is flagged (not an error) when `‖u‖∞` exceeds the
/// blow-up threshold, a value becomes non-finite, or the tracked flow map
/// stops being a diffeomorphism.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationOutput> {
    config.validate()?;
    let n = config.n;
    let dt = config.dt;
    let steps = config.steps();
    let rhs = config.rhs();
    let momentum = rhs.momentum_operator();
    let dealias = config.dealias;

    let mut u = config.initial.series().sample(n)?;
    let mut flow = config.track_flow.then(|| FlowMap::identity(n));
    let mut tracker = config.track_flow.then(|| ResidualTracker::new(dt));

    let mut out = SimulationOutput {
        rows: Vec::new(),
        snapshots: Vec::new(),
        flow_residuals: Vec::new(),
        status: RunStatus::Completed,
        steps_taken: 0,
    };
    let is_output = |step: usize| step.is_multiple_of(config.output_every) || step == steps;
    let record = |out: &mut SimulationOutput, t: f64, u: &PeriodicField, flow: Option<&FlowMap>| -> Result<()> {
        out.rows.push(DiagnosticsRow::compute(t, u, &momentum, flow)?);
        if config.snapshots {
            out.snapshots.push(Snapshot {
                t,
                u: u.clone(),
                g: flow.map(|f| f.g.clone()),
            });
        }
        Ok(())
    };

    record(&mut out, 0.0, &u, flow.as_ref())?;
    if let (Some(tr), Some(f)) = (tracker.as_mut(), flow.as_ref()) {
        tr.push(0, &u, &f.g, true);
    }

    for step in 1..=steps {
        let t = step as f64 * dt;
        let next = match &flow {
            None => rk4_vec(u.samples(), dt, |y| {
                Ok(rhs.eval(&PeriodicField::from_raw(y.to_vec()), dealias)?.into_samples())
            })?,
            Some(f) => {
                let mut y = u.samples().to_vec();
                y.extend_from_slice(&f.g);
                rk4_vec(&y, dt, |y| {
                    let (us, gs) = y.split_at(n);
                    let uf = PeriodicField::from_raw(us.to_vec());
                    let mut dy = rhs.eval(&uf, dealias)?.into_samples();
                    dy.extend(velocity_at(&uf.transform(), gs));
                    Ok(dy)
                })?
            }
        };
        let (us, gs) = next.split_at(n);
        let candidate = PeriodicField::from_raw(us.to_vec());
        out.steps_taken = step;

        let non_finite = !candidate.is_finite() || gs.iter().any(|v| !v.is_finite());
        if non_finite || candidate.linf_norm() > config.blowup_threshold {
            let reason = if non_finite {
                "non-finite value".to_string()
            } else {
                format!(
                    "|u|_inf = {:e} exceeds threshold {:e}",
                    candidate.linf_norm(),
                    config.blowup_threshold
                )
            };
            out.status = RunStatus::BlowupSuspected { t, reason };
            break;
        }
        u = candidate;
        if flow.is_some() {
            let map = FlowMap::from_positions(t, gs.to_vec());
            if !map.is_diffeomorphism() {
                out.status = RunStatus::DiffeomorphismLost {
                    t,
                    min_gx: map.min_gx(),
                };
                break;
            }
            flow = Some(map);
        }
        if let (Some(tr), Some(f)) = (tracker.as_mut(), flow.as_ref()) {
            tr.push(step, &u, &f.g, is_output(step));
        }
        if is_output(step) {
            record(&mut out, t, &u, flow.as_ref())?;
        }
    }

    if let Some(mut tr) = tracker {
        tr.finish();
        out.flow_residuals = tr.residuals;
    }
    Ok(out)
}

/// Exact solution of `u_t + c u_x = 0` used to verify the integrator order.
pub fn advected(series: &TrigSeries, speed: f64, t: f64, n: usize) -> Result<PeriodicField> {
    PeriodicField::from_fn(n, |x| series.eval(x - speed * t))
}

/// Method-of-characteristics solution of the Burgers form `u_t + 3 u u_x = 0`
/// before shock formation: `u(x, t) = u₀(ξ)` with `x = ξ + 3 u₀(ξ) t`.
pub fn burgers_characteristics(u0: &TrigSeries, t: f64, n: usize) -> Result<PeriodicField> {
    let du0 = |xi: f64| {
        let c: f64 = u0
            .cos
            .iter()
            .enumerate()
            .map(|(k, a)| -a * 2.0 * PI * k as f64 * (2.0 * PI * k as f64 * xi).sin())
            .sum();
        let s: f64 = u0
            .sin
            .iter()
            .enumerate()
            .map(|(i, b)| b * 2.0 * PI * (i + 1) as f64 * (2.0 * PI * (i + 1) as f64 * xi).cos())
            .sum();
        c + s
    };
    let points = grid_points(n);
    let mut values = Vec::with_capacity(n);
    for x in points {
        let mut xi = x;
        for _ in 0..100 {
            let f = xi + 3.0 * u0.eval(xi) * t - x;
            let df = 1.0 + 3.0 * du0(xi) * t;
            let step = f / df;
            xi -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        values.push(u0.eval(xi));
    }
    PeriodicField::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::diagnostics::relative_drift;

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let u = PeriodicField::from_fn(16, |x| (2.0 * PI * x).sin()).unwrap();
        let s = SimulationState::new(0.0, u.clone());
        let next = step_rk4(|f| Ok(PeriodicField::zeros(f.n()).unwrap()), &s, 0.3).unwrap();
        assert_eq!(next.u, u);
        assert!((next.t - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rk4_is_fourth_order_on_advection() {
        let series = TrigSeries {
            cos: vec![0.0, 0.3],
            sin: vec![1.0, 0.0, 0.2],
        };
        let n = 32;
        let err = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut s = SimulationState::new(0.0, series.sample(n).unwrap());
            for _ in 0..steps {
                s = step_rk4(|u| Ok(-&u.dx()), &s, dt).unwrap();
            }
            (&s.u - &advected(&series, 1.0, 1.0, n).unwrap()).linf_norm()
        };
        let errors: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| err(dt)).collect();
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 3.8, "order {order}, errors {errors:?}");
        }
    }

    #[test]
    fn validation_names_fields() {
        let base = SimulationConfig::new(
            InertiaSpec::MuMinusDxx,
            InitialCondition::Preset(Preset::Mucauchy),
            64,
            1e-3,
            0.01,
        );
        assert!(base.validate().is_ok());
        let check = |cfg: SimulationConfig, field: &str| match cfg.validate() {
            Err(Error::InvalidConfig { field: f, .. }) => assert_eq!(f, field),
            other => panic!("expected error on {field}, got {other:?}"),
        };
        check(SimulationConfig { dt: 0.0, ..base.clone() }, "dt");
        check(SimulationConfig { dt: -1e-3, ..base.clone() }, "dt");
        check(SimulationConfig { t_end: 0.0105, ..base.clone() }, "t_end");
        check(SimulationConfig { n: 6, ..base.clone() }, "N");
        check(SimulationConfig { n: 65, ..base.clone() }, "N");
        check(SimulationConfig { output_every: 0, ..base.clone() }, "output_every");
        check(
            SimulationConfig {
                inertia: InertiaSpec::OneMinusLambdaDxx { lambda: -1.0 },
                ..base.clone()
            },
            "inertia",
        );
        check(
            SimulationConfig {
                inertia: InertiaSpec::MinusDxx,
                ..base.clone()
            },
            "initial",
        );
        check(
            SimulationConfig {
                initial: InitialCondition::trig(TrigSeries {
                    cos: vec![0.0; 30],
                    sin: vec![1.0; 25],
                }),
                ..base.clone()
            },
            "initial",
        );
        check(
            SimulationConfig {
                form: Form::Mub,
                inertia: InertiaSpec::identity(),
                ..base
            },
            "inertia",
        );
    }

    #[test]
    fn config_json_shape() {
        let json = r#"{
            "b": 3.0, "N": 64, "dt": 0.001, "t_end": 0.01,
            "initial": "mucauchy", "form": "mub", "output_every": 5
        }"#;
        let cfg: SimulationConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.form, Form::Mub);
        assert_eq!(cfg.inertia, InertiaSpec::MuMinusDxx);
        assert!(cfg.dealias);
        assert_eq!(cfg.blowup_threshold, 1e3);
        let json = r#"{
            "inertia": {"type": "one_minus_lambda_dxx", "lambda": 0.0},
            "N": 32, "dt": 0.01, "t_end": 0.1,
            "initial": {"type": "trig", "cos": [0.0], "sin": [0.1]}
        }"#;
        let cfg: SimulationConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.initial.series().sin, vec![0.1]);
        assert!(serde_json::from_str::<SimulationConfig>(r#"{"dt": 1, "t_end": 1, "initial": "cos1", "bogus": 1}"#).is_err());
    }

    #[test]
    fn outputs_include_start_cadence_and_end() {
        let mut cfg = SimulationConfig::mub(2.0, InitialCondition::Preset(Preset::Mucauchy), 32, 0.01, 0.07);
        cfg.output_every = 3;
        let out = simulate(&cfg).unwrap();
        let times: Vec<f64> = out.rows.iter().map(|r| (r.t * 100.0).round()).collect();
        assert_eq!(times, vec![0.0, 3.0, 6.0, 7.0]);
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.steps_taken, 7);
    }

    #[test]
    fn mean_of_momentum_is_invariant_for_any_b() {
        for b in [-1.5, 0.0, 1.0, 3.0, 4.0] {
            let cfg = SimulationConfig::mub(b, InitialCondition::Preset(Preset::Mucauchy), 64, 1e-3, 0.05);
            let out = simulate(&cfg).unwrap();
            assert!(relative_drift(&out.rows, |r| r.mu_m, 0.0) <= 1e-10, "b = {b}");
            assert!(relative_drift(&out.rows, |r| r.mu_u, 0.0) <= 1e-10, "b = {b}");
        }
    }

    #[test]
    fn blowup_is_flagged_not_an_error() {
        let mut cfg = SimulationConfig::new(
            InertiaSpec::identity(),
            InitialCondition::trig(TrigSeries {
                cos: vec![0.0],
                sin: vec![0.1],
            }),
            32,
            1e-2,
            0.1,
        );
        cfg.blowup_threshold = 0.05;
        let out = simulate(&cfg).unwrap();
        assert!(matches!(out.status, RunStatus::BlowupSuspected { .. }));
        assert_eq!(out.steps_taken, 1);
        assert_eq!(out.rows.len(), 1);
    }

    #[test]
    fn rigid_rotation_flow_for_constant_velocity() {
        let mut cfg = SimulationConfig::new(
            InertiaSpec::MuMinusDxx,
            InitialCondition::trig(TrigSeries {
                cos: vec![0.3],
                sin: vec![],
            }),
            16,
            0.05,
            1.0,
        );
        cfg.track_flow = true;
        cfg.snapshots = true;
        cfg.output_every = 4;
        let out = simulate(&cfg).unwrap();
        let last = out.snapshots.last().unwrap();
        for (j, g) in last.g.as_ref().unwrap().iter().enumerate() {
            assert!((g - (j as f64 / 16.0 + 0.3)).abs() < 1e-12);
        }
        assert_eq!(out.flow_residuals.len(), out.rows.len());
        assert!(out.max_flow_residual().unwrap() < 1e-10);
    }

    #[test]
    fn characteristics_solution_at_time_zero_is_initial_data() {
        let u0 = TrigSeries {
            cos: vec![0.0],
            sin: vec![0.1],
        };
        let a = burgers_characteristics(&u0, 0.0, 32).unwrap();
        assert!((&a - &u0.sample(32).unwrap()).linf_norm() < 1e-15);
    }
}
