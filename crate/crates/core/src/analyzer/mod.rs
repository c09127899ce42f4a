//! Metric-compatibility analysis for the μ-b family.
//!
//! Replays the case analysis showing that the μ-b equation is the Euler
//! equation of a right-invariant metric with regular inertia operator `A`
//! only for `b = 2`, `A = L`. Each necessary condition is evaluated
//! numerically and reported with a witness. This certifies the necessary
//! conditions only; it is not a proof over all inertia operators.
//!
//! Mode `k` has physical wavenumber `n = 2πk` (period 1).

mod modes;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inertia::InertiaSpec;
use crate::spectral::PeriodicField;

pub use modes::{CoupledOperator, ModeSeries};

/// Tolerance for integrality tests on `α / 2π`.
pub const INTEGRALITY_TOL: f64 = 1e-9;
/// Pass threshold for residual-type conditions.
pub const CONDITION_TOL: f64 = 1e-9;

/// Nonzero Fourier mode index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ModeIndex(i64);

impl ModeIndex {
    pub fn new(k: i64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroMode);
        }
        Ok(Self(k))
    }

    pub fn k(self) -> i64 {
        self.0
    }

    /// `n = 2πk`
    pub fn wavenumber(self) -> f64 {
        2.0 * PI * self.0 as f64
    }
}

/// `α_n = b/n + n`
pub fn alpha(b: f64, k: ModeIndex) -> f64 {
    let n = k.wavenumber();
    b / n + n
}

/// `α_n / 2π = b/(4π²k) + k`, with the factor `2π` divided out exactly.
pub fn alpha_over_two_pi(b: f64, k: ModeIndex) -> f64 {
    b / (4.0 * PI * PI * k.k() as f64) + k.k() as f64
}

/// `β_n = 2n²/b`
pub fn beta(b: f64, k: ModeIndex) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::SecularBranch);
    }
    let n = k.wavenumber();
    Ok(2.0 * n * n / b)
}

fn nearest_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= INTEGRALITY_TOL).then_some(r as i64)
}

fn l_spec() -> InertiaSpec {
    InertiaSpec::MuMinusDxx
}

/// `‖A⁻¹(2(Au)u_x + u(Au)_x) − L⁻¹(b(Lu)u_x + u(Lu)_x)‖_∞`
pub fn eq7_residual(a: &InertiaSpec, b: f64, u: &PeriodicField) -> Result<f64> {
    let ux = u.dx();
    let transport = |m: &PeriodicField, weight: f64| -> Result<PeriodicField> {
        let stretch = m.product(&ux, true)?.scale(weight);
        Ok(&stretch + &u.product(&m.dx(), true)?)
    };
    let lhs = a.invert(&transport(&a.apply(u)?, 2.0)?)?;
    let l = l_spec();
    let rhs = l.invert(&transport(&l.apply(u)?, b)?)?;
    Ok((&lhs - &rhs).linf_norm())
}

/// `‖A⁻¹(2u_x + (Au)_x) − L⁻¹(bu_x + (Lu)_x)‖_∞`, for normalized `A`.
pub fn eq8_residual(a: &InertiaSpec, b: f64, u: &PeriodicField) -> Result<f64> {
    if !a.is_normalized() {
        return Err(Error::NotNormalized { s0: a.symbol(0)? });
    }
    let ux = u.dx();
    let lhs = a.invert(&(&ux.scale(2.0) + &a.apply(u)?.dx()))?;
    let l = l_spec();
    let rhs = l.invert(&(&ux.scale(b) + &l.apply(u)?.dx()))?;
    Ok((&lhs - &rhs).linf_norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCheck {
    pub pass: bool,
    /// `A𝟙 = c𝟙`
    pub c: f64,
    /// `max |A𝟙 − c|` on the grid.
    pub defect: f64,
}

/// Applies `A` to the constant function on a small grid.
pub fn check_a1_constant(a: &InertiaSpec) -> Result<ConstantCheck> {
    let a1 = a.apply(&PeriodicField::constant(16, 1.0)?)?;
    let c = a1.mean();
    let defect = a1.samples().iter().map(|v| (v - c).abs()).fold(0.0, f64::max);
    Ok(ConstantCheck {
        pass: defect <= CONDITION_TOL * c.abs().max(1.0),
        c,
        defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeBeta {
    pub k: i64,
    pub beta: f64,
}

/// Outcome of the mode ODE `v' − iα_n v = −2in u_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SecularOutcome {
    /// `α_n = n`: every solution `(c − 2inx)u_n` fails to be periodic;
    /// `witness` is the jump `|v(1) − v(0)|` at `k = 1`.
    Resonant { witness: f64 },
    /// The periodic solution is `β_n u_n`. `ode_residual` is the largest
    /// relative defect of `β_n(n − α_n) = −2n` over the listed modes.
    Particular { betas: Vec<ModeBeta>, ode_residual: f64 },
}

pub fn secular_obstruction(b: f64, max_k: usize) -> SecularOutcome {
    let n1 = 2.0 * PI;
    if alpha(b, ModeIndex(1)) == n1 {
        // v(x) = (c − 2inx) e^{inx} with e^{in} = 1, so v(1) − v(0) = −2in for every c
        let secular = |c: f64, x: f64| Complex64::new(c, -2.0 * n1 * x) * Complex64::from_polar(1.0, n1 * x);
        let witness = [0.0, 1.0, -3.5]
            .iter()
            .map(|&c| (secular(c, 1.0) - secular(c, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        return SecularOutcome::Resonant { witness };
    }
    let mut betas = Vec::with_capacity(max_k);
    let mut ode_residual = 0.0_f64;
    for k in 1..=max_k.max(1) as i64 {
        let idx = ModeIndex(k);
        let n = idx.wavenumber();
        let bk = beta(b, idx).expect("b is nonzero off resonance");
        ode_residual = ode_residual.max((bk * (n - alpha(b, idx)) + 2.0 * n).abs() / (2.0 * n));
        betas.push(ModeBeta { k, beta: bk });
    }
    SecularOutcome::Particular { betas, ode_residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierCheck {
    pub pass: bool,
    /// `|12β_n − (b+1)β_{2n}|` at `k = 1`.
    pub residual: f64,
    /// `residual · |b| / n²`, which equals `|24 − 8(b+1)|`.
    pub normalized: f64,
}

/// Diagonal-case consistency at mode `k`.
pub fn multiplier_consistency_at(b: f64, k: ModeIndex) -> Result<MultiplierCheck> {
    let n = k.wavenumber();
    let beta_n = beta(b, k)?;
    let beta_2n = beta(b, ModeIndex(2 * k.k()))?;
    let residual = (12.0 * beta_n - (b + 1.0) * beta_2n).abs();
    let normalized = residual * b.abs() / (n * n);
    Ok(MultiplierCheck {
        pass: normalized <= CONDITION_TOL,
        residual,
        normalized,
    })
}

pub fn multiplier_consistency(b: f64) -> Result<MultiplierCheck> {
    multiplier_consistency_at(b, ModeIndex(1))
}

/// Numerical replay of the contradiction at `b = −2p²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalReplay {
    pub k: i64,
    pub p: f64,
    /// Diagonal entry `β_p` of the hypothetical operator (`−1` here).
    pub beta_p: f64,
    /// Mode-0 coefficient of the residual identity for unit `γ_p`, as `[re, im]`.
    pub mode0_unit_gamma: [f64; 2],
    /// Mode-0 coefficient for `γ_p = 0`.
    pub mode0_zero_gamma: [f64; 2],
    /// The unique `γ_p` that makes the mode-0 coefficient vanish.
    pub forced_gamma: [f64; 2],
    /// `|p · γ_forced|`
    pub p_gamma: f64,
    /// Residual at mode `2k`, unaffected by `γ_p`.
    pub mode2k_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffDiagonalOutcome {
    /// `α_p ∉ 2πℤ`, so the off-diagonal component is not periodic.
    NotPeriodic,
    /// `α_p = 2πm` but `α_m ∉ 2πℤ`.
    PartnerNotPeriodic { m: i64, alpha_m_over_two_pi: f64 },
    /// `α_p = 2πm`, `α_m = 2πj` with `j ≠ k`: symmetry forces `γ_p = 0`.
    PartnerMismatch { m: i64, j: i64 },
    /// `m = −k`, `b = −2p²`: replayed and refuted.
    Contradiction { m: i64, replay: OffDiagonalReplay },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalStep {
    pub k: i64,
    pub alpha_over_two_pi: f64,
    pub outcome: OffDiagonalOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagonalReport {
    pub b: f64,
    pub steps: Vec<OffDiagonalStep>,
    /// Every scanned mode ends with `γ_p = 0`.
    pub excluded: bool,
}

impl OffDiagonalReport {
    pub fn contradictions(&self) -> impl Iterator<Item = &OffDiagonalReplay> {
        self.steps.iter().filter_map(|s| match &s.outcome {
            OffDiagonalOutcome::Contradiction { replay, .. } => Some(replay),
            _ => None,
        })
    }

    /// True when no scanned mode admits a periodic off-diagonal component.
    pub fn is_vacuous(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s.outcome, OffDiagonalOutcome::NotPeriodic))
    }
}

fn to_pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

/// Difference of the two sides of the velocity identity at `u = e^{ipx}`, with the
/// hypothetical operator `A u_p = γ e^{2πimx} + β_p u_p`.
fn replay_residual(b: f64, k: i64, m: i64, gamma: Complex64) -> Result<ModeSeries> {
    let diag = |j: i64| if j == 0 { 1.0 } else { 2.0 * (2.0 * PI * j as f64).powi(2) / b };
    let a = CoupledOperator {
        source: k,
        target: m,
        gamma,
        diag,
    };
    let l = CoupledOperator {
        source: k,
        target: m,
        gamma: Complex64::default(),
        diag: |j: i64| if j == 0 { 1.0 } else { (2.0 * PI * j as f64).powi(2) },
    };
    let u = ModeSeries::mode(k, Complex64::new(1.0, 0.0));
    let ux = u.dx();
    let au = a.apply(&u);
    let lhs = a.invert(&au.mul(&ux).scale(2.0.into()).add(&u.mul(&au.dx())))?;
    let lu = l.apply(&u);
    let rhs = l.invert(&lu.mul(&ux).scale(b.into()).add(&u.mul(&lu.dx())))?;
    Ok(lhs.sub(&rhs))
}

fn replay(b: f64, k: i64, m: i64) -> Result<OffDiagonalReplay> {
    let idx = ModeIndex::new(k)?;
    let r0 = replay_residual(b, k, m, Complex64::default())?;
    let r1 = replay_residual(b, k, m, Complex64::new(1.0, 0.0))?;
    // mode-0 coefficient is affine in γ
    let (c0, c1) = (r0.get(0), r1.get(0));
    let slope = c1 - c0;
    let forced = if slope.norm() > 0.0 { -c0 / slope } else { Complex64::new(f64::NAN, 0.0) };
    let p = idx.wavenumber();
    Ok(OffDiagonalReplay {
        k,
        p,
        beta_p: beta(b, idx)?,
        mode0_unit_gamma: to_pair(c1),
        mode0_zero_gamma: to_pair(c0),
        forced_gamma: to_pair(forced),
        p_gamma: p.abs() * forced.norm(),
        mode2k_defect: r0.get(2 * k).norm(),
    })
}

/// Scans `p = 2πk`, `1 ≤ |k| ≤ max_k`, for an admissible off-diagonal
/// component of `A u_p`.
pub fn offdiagonal_obstruction(b: f64, max_k: usize) -> Result<OffDiagonalReport> {
    if b == 0.0 {
        return Err(Error::SecularBranch);
    }
    let max_k = max_k.max(1) as i64;
    let mut steps = Vec::new();
    for k in (-max_k..=max_k).filter(|&k| k != 0) {
        let a_k = alpha_over_two_pi(b, ModeIndex(k));
        let outcome = match nearest_integer(a_k).filter(|&m| m != 0 && m != k) {
            None => OffDiagonalOutcome::NotPeriodic,
            Some(m) => {
                let a_m = alpha_over_two_pi(b, ModeIndex(m));
                match nearest_integer(a_m) {
                    None => OffDiagonalOutcome::PartnerNotPeriodic {
                        m,
                        alpha_m_over_two_pi: a_m,
                    },
                    Some(j) if j != k => OffDiagonalOutcome::PartnerMismatch { m, j },
                    Some(_) => OffDiagonalOutcome::Contradiction {
                        m,
                        replay: replay(b, k, m)?,
                    },
                }
            }
        };
        steps.push(OffDiagonalStep {
            k,
            alpha_over_two_pi: a_k,
            outcome,
        });
    }
    let excluded = steps.iter().all(|s| match &s.outcome {
        OffDiagonalOutcome::Contradiction { replay, .. } => replay.p_gamma <= 1e-10,
        _ => true,
    });
    Ok(OffDiagonalReport { b, steps, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable once an earlier condition has failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub witness: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Metric { operator: InertiaSpec, symbol: String },
    NonMetric { reason: String, witness: f64 },
}

impl Verdict {
    pub fn is_metric(&self) -> bool {
        matches!(self, Verdict::Metric { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub b: f64,
    pub verdict: Verdict,
    pub checks: Vec<ConditionCheck>,
    pub offdiagonal: Option<OffDiagonalReport>,
}

impl ClassificationReport {
    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn status(pass: bool) -> CheckStatus {
    if pass {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

/// Runs every necessary condition for `b`. The verdict is `Metric` only if
/// all of them pass; otherwise it names the first failure.
pub fn classify(b: f64, max_k: usize, trial_modes: usize) -> Result<ClassificationReport> {
    let max_k = max_k.max(1);
    let trial_modes = trial_modes.max(1);
    let mut checks = Vec::new();

    let a1 = check_a1_constant(&l_spec())?;
    checks.push(ConditionCheck {
        name: "a1_constant",
        status: status(a1.pass),
        witness: a1.defect,
        detail: format!("L1 = {}", a1.c),
    });

    let secular = secular_obstruction(b, max_k);
    let resonant = match &secular {
        SecularOutcome::Resonant { witness } => {
            checks.push(ConditionCheck {
                name: "secular_resonance",
                status: CheckStatus::Fail,
                witness: *witness,
                detail: "alpha_n = n: no periodic solution of the mode equation".into(),
            });
            true
        }
        SecularOutcome::Particular { ode_residual, .. } => {
            checks.push(ConditionCheck {
                name: "secular_resonance",
                status: CheckStatus::Pass,
                witness: *ode_residual,
                detail: "periodic particular solution beta_n u_n".into(),
            });
            false
        }
    };

    let mut offdiagonal = None;
    if resonant {
        for name in ["multiplier_consistency", "beta_equals_l_symbol", "offdiagonal_excluded"] {
            checks.push(ConditionCheck {
                name,
                status: CheckStatus::Skipped,
                witness: 0.0,
                detail: "undefined for b = 0".into(),
            });
        }
    } else {
        let mc = multiplier_consistency(b)?;
        checks.push(ConditionCheck {
            name: "multiplier_consistency",
            status: status(mc.pass),
            witness: mc.normalized,
            detail: format!("|12 beta_n - (b+1) beta_2n| = {:e}", mc.residual),
        });

        let mut symbol_defect = 0.0_f64;
        for k in 1..=max_k as i64 {
            let idx = ModeIndex(k);
            let s = l_spec().symbol(k as usize)?;
            symbol_defect = symbol_defect.max((beta(b, idx)? - s).abs() / s);
        }
        checks.push(ConditionCheck {
            name: "beta_equals_l_symbol",
            status: status(symbol_defect <= CONDITION_TOL),
            witness: symbol_defect,
            detail: format!("max relative |beta_k - (2 pi k)^2| over k <= {max_k}"),
        });

        let od = offdiagonal_obstruction(b, max_k)?;
        let worst = od.contradictions().map(|r| r.p_gamma).fold(0.0, f64::max);
        let detail = if od.is_vacuous() {
            "no admissible off-diagonal mode".to_string()
        } else {
            let ks: Vec<i64> = od.contradictions().map(|r| r.k).collect();
            format!("gamma_p forced to zero at k = {ks:?}")
        };
        checks.push(ConditionCheck {
            name: "offdiagonal_excluded",
            status: status(od.excluded),
            witness: worst,
            detail,
        });
        offdiagonal = Some(od);
    }

    let n = (8 * trial_modes).next_power_of_two().max(16);
    let mut worst = 0.0_f64;
    for k in 1..=trial_modes {
        let u = PeriodicField::from_fn(n, |x| (2.0 * PI * k as f64 * x).cos())?;
        worst = worst.max(eq7_residual(&l_spec(), b, &u)?);
    }
    checks.push(ConditionCheck {
        name: "eq7_residual",
        status: status(worst <= CONDITION_TOL),
        witness: worst,
        detail: format!("A = L on cos(2 pi k x), k <= {trial_modes}"),
    });

    let verdict = match checks.iter().find(|c| c.status == CheckStatus::Fail) {
        None => Verdict::Metric {
            operator: l_spec(),
            symbol: "s_0 = 1, s_k = (2 pi k)^2".into(),
        },
        Some(c) => Verdict::NonMetric {
            reason: c.name.to_string(),
            witness: c.witness,
        },
    };
    Ok(ClassificationReport {
        b,
        verdict,
        checks,
        offdiagonal,
    })
}
