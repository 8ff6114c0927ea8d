//! Single-qubit environment presets and the two figure sweeps.
//!
//! The environment starts in `c0|0><0| + (1 - c0)|1><1|`. Only the pointer
//! label `00` couples to it, in both dephasing windows; every other label
//! evolves trivially. A coupling is
//! `w(s) = e^{i φa s}|a><a| + e^{i φb s}|b><b|` with `|a> = x|0> + y|1>` and
//! `|b> = y*|0> - x*|1>`.
//!
//! Sweeps are parameterized by dimensionless phase products, so the rates
//! are fixed (`φb = 1` in the first figure, `φa - φb = 1` in the second) and
//! the grid runs over time.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::entanglement::{CorrelationReport, SEPARABILITY_ATOL};
use crate::error::{Error, Result};
use crate::linalg::{uhlmann_fidelity, ComplexMatrix};
use crate::model::{BellOutcome, DephasingInteraction, EnvDensity, PureQubit};
use crate::protocol::{qubit_coherence, Branch, Engine, SecondDephasing};

const NORM_TOL: f64 = 1e-12;
/// Number of points in the default sweep grids.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Two-level phase coupling diagonal in the basis `{|a>, |b>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoupling {
    x: Complex64,
    y: Complex64,
    phase_a: f64,
    phase_b: f64,
}

impl PhaseCoupling {
    pub fn new(x: Complex64, y: Complex64, phase_a: f64, phase_b: f64) -> Result<Self> {
        let norm_sqr = x.norm_sqr() + y.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "|x|^2 + |y|^2 = {norm_sqr}, expected 1"
            )));
        }
        if !(phase_a.is_finite() && phase_b.is_finite()) {
            return Err(Error::InvalidParameter("coupling phase rates must be finite".into()));
        }
        Ok(Self { x, y, phase_a, phase_b })
    }

    /// `e^{i φ0 s}|0><0| + e^{i φ1 s}|1><1|`.
    pub fn diagonal(phi0: f64, phi1: f64) -> Self {
        Self {
            x: Complex64::new(1.0, 0.0),
            y: Complex64::new(0.0, 0.0),
            phase_a: phi0,
            phase_b: phi1,
        }
    }

    /// Real `x = sqrt(x2)`, `y = sqrt(1 - x2)`.
    pub fn from_weight(x2: f64, phase_a: f64, phase_b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x2) {
            return Err(Error::InvalidParameter(format!("|x|^2 = {x2} outside [0, 1]")));
        }
        Self::new(
            Complex64::new(x2.sqrt(), 0.0),
            Complex64::new((1.0 - x2).sqrt(), 0.0),
            phase_a,
            phase_b,
        )
    }

    pub fn x(&self) -> Complex64 {
        self.x
    }

    pub fn y(&self) -> Complex64 {
        self.y
    }

    pub fn phase_a(&self) -> f64 {
        self.phase_a
    }

    pub fn phase_b(&self) -> f64 {
        self.phase_b
    }

    /// Phase rates on `|0>` and `|1>` when the coupling is diagonal in the
    /// computational basis, `None` otherwise.
    pub fn diagonal_rates(&self) -> Option<(f64, f64)> {
        if self.y.norm() == 0.0 {
            Some((self.phase_a, self.phase_b))
        } else if self.x.norm() == 0.0 {
            Some((self.phase_b, self.phase_a))
        } else {
            None
        }
    }

    /// `w(s)`.
    pub fn unitary(&self, s: f64) -> ComplexMatrix {
        let a = [self.x, self.y];
        let b = [self.y.conj(), -self.x.conj()];
        let ea = Complex64::from_polar(1.0, self.phase_a * s);
        let eb = Complex64::from_polar(1.0, self.phase_b * s);
        let mut w = ComplexMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                w[(i, j)] = ea * a[i] * a[j].conj() + eb * b[i] * b[j].conj();
            }
        }
        w
    }
}

/// One point family of the single-qubit environment example.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Ground-state population of the environment.
    pub c0: f64,
    /// Coupling of label `00` during the first window (length `tau`).
    pub first: PhaseCoupling,
    /// Coupling of label `00` during the second window (length `t`).
    pub second: PhaseCoupling,
    pub tau: f64,
    pub t_grid: Vec<f64>,
    pub psi: PureQubit,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.c0) {
            return Err(Error::InvalidParameter(format!("c0 = {} outside [0, 1]", self.c0)));
        }
        if !self.tau.is_finite() || self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("times must be finite".into()));
        }
        // re-run the coupling checks: fields are public
        for c in [&self.first, &self.second] {
            PhaseCoupling::new(c.x, c.y, c.phase_a, c.phase_b)?;
        }
        Ok(())
    }

    pub fn env(&self) -> Result<EnvDensity> {
        EnvDensity::diagonal(&[self.c0, 1.0 - self.c0])
    }
}

fn coupled_on_00(w: ComplexMatrix) -> Result<DephasingInteraction> {
    let id = ComplexMatrix::identity(2);
    DephasingInteraction::from_pair_unitaries([w, id.clone(), id.clone(), id])
}

/// First and second interactions in unitary form: `w00(tau)` and `w'00(t)` on
/// label `00`, identity on `01`, `10` and `11`.
pub fn build_interactions(cfg: &ScenarioConfig, t: f64) -> Result<(DephasingInteraction, DephasingInteraction)> {
    cfg.validate()?;
    Ok((
        coupled_on_00(cfg.first.unitary(cfg.tau))?,
        coupled_on_00(cfg.second.unitary(t))?,
    ))
}

/// Closed-form coherence of the returned qubit for a first coupling that is
/// diagonal in the environment basis:
/// `|x|²[c0 e^{i(φ0τ ± φa t)} + c1 e^{i(φ1τ ± φb t)}] + |y|²[c0 e^{i(φ0τ ± φb t)} + c1 e^{i(φ1τ ± φa t)}]`,
/// upper signs for the `Φ` branch.
pub fn closed_form_coherence(cfg: &ScenarioConfig, t: f64, branch: Branch) -> Result<Complex64> {
    cfg.validate()?;
    let (phi0, phi1) = cfg.first.diagonal_rates().ok_or_else(|| {
        Error::InvalidParameter("closed form needs a first coupling diagonal in the environment basis".into())
    })?;
    let sign = match branch {
        Branch::Phi => 1.0,
        Branch::Psi => -1.0,
    };
    let (c0, c1) = (cfg.c0, 1.0 - cfg.c0);
    let (pa, pb) = (cfg.second.phase_a, cfg.second.phase_b);
    let e =
        |first_phase: f64, second_rate: f64| Complex64::from_polar(1.0, first_phase * cfg.tau + sign * second_rate * t);
    let x2 = cfg.second.x.norm_sqr();
    let y2 = cfg.second.y.norm_sqr();
    Ok((e(phi0, pa) * c0 + e(phi1, pb) * c1) * x2 + (e(phi0, pb) * c0 + e(phi1, pa) * c1) * y2)
}

/// Engine results for one returned-qubit branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    /// Dephasing factor of qubit A relative to `α β*`.
    pub coherence: Complex64,
    pub correlations: CorrelationReport,
}

/// Both branches of the noisy return step at one time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPoint {
    pub t: f64,
    pub phi: BranchResult,
    pub psi: BranchResult,
}

impl ScenarioPoint {
    pub fn branch(&self, branch: Branch) -> &BranchResult {
        match branch {
            Branch::Phi => &self.phi,
            Branch::Psi => &self.psi,
        }
    }
}

/// Runs the full protocol (forward outcome `Φ+`) and reports the A ⊗ E state
/// after each branch of the noisy return step.
pub fn evaluate(cfg: &ScenarioConfig, t: f64, engine: &Engine) -> Result<ScenarioPoint> {
    let (first, second) = build_interactions(cfg, t)?;
    let env = cfg.env()?;
    let run_branch = |branch: Branch| -> Result<BranchResult> {
        let trace = engine.run(
            &cfg.psi,
            &env,
            &first,
            cfg.tau,
            Some(SecondDephasing {
                interaction: &second,
                duration: t,
            }),
            BellOutcome::PhiPlus,
            branch.representative(),
        )?;
        let stage = trace.get("step2_noisy").expect("second window requested");
        let ae = stage.state.reduce(&["A"])?;
        Ok(BranchResult {
            coherence: qubit_coherence(&ae, &cfg.psi)?,
            correlations: CorrelationReport::of(&ae, SEPARABILITY_ATOL)?,
        })
    };
    Ok(ScenarioPoint {
        t,
        phi: run_branch(Branch::Phi)?,
        psi: run_branch(Branch::Psi)?,
    })
}

/// Parameters of the coherence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Params {
    pub c0: f64,
    /// `φ1 τ` of the diagonal first coupling (`φ0 = 0`).
    pub phi1_tau: f64,
    pub x2_values: Vec<f64>,
    /// Values of `φb t`.
    pub grid: Vec<f64>,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Self {
            c0: 0.5,
            phi1_tau: FRAC_PI_2,
            x2_values: vec![0.1, 0.3, 0.5],
            grid: linspace(0.0, 2.0 * PI, DEFAULT_GRID_POINTS),
        }
    }
}

/// `(|x|², φb t, |c^Φ|, |c^Ψ|)` plus the largest engine-versus-closed-form gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig1Row {
    pub x2: f64,
    pub phib_t: f64,
    pub abs_c_phi: f64,
    pub abs_c_psi: f64,
    pub residual: f64,
}

/// Scenario of one coherence curve: `τ = 1`, `φa = 0`, `φb = 1`.
pub fn fig1_config(params: &Fig1Params, x2: f64) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        c0: params.c0,
        first: PhaseCoupling::diagonal(0.0, params.phi1_tau),
        second: PhaseCoupling::from_weight(x2, 0.0, 1.0)?,
        tau: 1.0,
        t_grid: params.grid.clone(),
        psi: PureQubit::plus(),
    })
}

pub fn fig1_table(params: &Fig1Params, engine: &Engine) -> Result<Vec<Fig1Row>> {
    let mut rows = Vec::with_capacity(params.x2_values.len() * params.grid.len());
    for &x2 in &params.x2_values {
        let cfg = fig1_config(params, x2)?;
        for &t in &cfg.t_grid {
            let point = evaluate(&cfg, t, engine)?;
            let closed_phi = closed_form_coherence(&cfg, t, Branch::Phi)?;
            let closed_psi = closed_form_coherence(&cfg, t, Branch::Psi)?;
            rows.push(Fig1Row {
                x2,
                phib_t: cfg.second.phase_b * t,
                abs_c_phi: point.phi.coherence.norm(),
                abs_c_psi: point.psi.coherence.norm(),
                residual: (point.phi.coherence - closed_phi)
                    .norm()
                    .max((point.psi.coherence - closed_psi).norm()),
            });
        }
    }
    Ok(rows)
}

/// Parameters of the entanglement sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Params {
    pub c0_values: Vec<f64>,
    /// Values of `(φa - φb) t`.
    pub grid: Vec<f64>,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Self {
            c0_values: vec![0.6, 0.7, 0.8, 0.9, 1.0],
            grid: linspace(0.0, PI, DEFAULT_GRID_POINTS),
        }
    }
}

/// `(c0, (φa - φb) t, E^Φ, E^Ψ, E^Φ - E^Ψ)`; `residual` is the larger of
/// `|E^Φ - 1 + F(w(2t) R w(2t)†, R)|` and `|E^Ψ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub c0: f64,
    pub phase_t: f64,
    pub e_phi: f64,
    pub e_psi: f64,
    pub e_diff: f64,
    pub residual: f64,
}

/// Equal couplings in both windows with `x = y = 1/√2`, `φa = 1`, `φb = 0`,
/// and `τ = t` for a single point.
pub fn fig2_config(c0: f64, t: f64) -> Result<ScenarioConfig> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let coupling = PhaseCoupling::new(h, h, 1.0, 0.0)?;
    Ok(ScenarioConfig {
        c0,
        first: coupling,
        second: coupling,
        tau: t,
        t_grid: vec![t],
        psi: PureQubit::plus(),
    })
}

/// `E^Φ` from the reduced expressions of the equal-coupling case: the two
/// conditional states are `w(2t) R(0) w(2t)†` and `R(0)`.
pub fn fig2_reduced_entanglement(cfg: &ScenarioConfig, t: f64) -> Result<f64> {
    let r0 = cfg.env()?.matrix().clone();
    let rotated = cfg.first.unitary(2.0 * t).conjugate(&r0);
    Ok(cfg.psi.entanglement_weight() * (1.0 - uhlmann_fidelity(&rotated, &r0)?))
}

pub fn fig2_table(params: &Fig2Params, engine: &Engine) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::with_capacity(params.c0_values.len() * params.grid.len());
    for &c0 in &params.c0_values {
        for &t in &params.grid {
            let cfg = fig2_config(c0, t)?;
            let point = evaluate(&cfg, t, engine)?;
            let e_phi = point.phi.correlations.entanglement;
            let e_psi = point.psi.correlations.entanglement;
            let reduced = fig2_reduced_entanglement(&cfg, t)?;
            rows.push(Fig2Row {
                c0,
                phase_t: (cfg.second.phase_a - cfg.second.phase_b) * t,
                e_phi,
                e_psi,
                e_diff: e_phi - e_psi,
                residual: (e_phi - reduced).abs().max(e_psi.abs()),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_point(x2: f64) -> ScenarioConfig {
        fig1_config(&Fig1Params::default(), x2).unwrap()
    }

    #[test]
    fn couplings_are_unitary() {
        let c = PhaseCoupling::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), 0.9, -1.7).unwrap();
        for s in [0.0, 0.4, 3.0] {
            assert!(c.unitary(s).unitarity_error() < 1e-12);
        }
        assert!(PhaseCoupling::new(Complex64::new(0.6, 0.0), Complex64::new(0.6, 0.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn basis_state_coupling_is_diagonal() {
        let w = PhaseCoupling::from_weight(1.0, 0.3, 1.2).unwrap().unitary(1.0);
        assert!(w[(0, 1)].norm() < 1e-16 && w[(1, 0)].norm() < 1e-16);
        assert!((w[(0, 0)] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert_eq!(
            PhaseCoupling::from_weight(0.0, 0.3, 1.2).unwrap().diagonal_rates(),
            Some((1.2, 0.3))
        );
    }

    #[test]
    fn trivial_first_coupling_keeps_full_coherence() {
        let cfg = ScenarioConfig {
            first: PhaseCoupling::diagonal(0.0, 0.0),
            ..fig1_point(0.3)
        };
        for branch in [Branch::Phi, Branch::Psi] {
            assert!((closed_form_coherence(&cfg, 0.0, branch).unwrap() - 1.0).norm() < 1e-15);
        }
        let point = evaluate(&cfg, 0.0, &Engine::default()).unwrap();
        assert!((point.phi.coherence - 1.0).norm() < 1e-12);
    }

    #[test]
    fn closed_form_at_zero_time() {
        let cfg = fig1_point(0.1);
        let expected = Complex64::new(0.5, 0.5);
        for branch in [Branch::Phi, Branch::Psi] {
            let c = closed_form_coherence(&cfg, 0.0, branch).unwrap();
            assert!((c - expected).norm() < 1e-15);
            assert!((c.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_weights_give_equal_branch_magnitudes() {
        let cfg = fig1_point(0.5);
        for t in linspace(0.0, 2.0 * PI, 17) {
            let phi = closed_form_coherence(&cfg, t, Branch::Phi).unwrap().norm();
            let psi = closed_form_coherence(&cfg, t, Branch::Psi).unwrap().norm();
            assert!((phi - psi).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_rejects_entangling_first_coupling() {
        assert!(closed_form_coherence(&fig2_config(0.7, 0.3).unwrap(), 0.3, Branch::Phi).is_err());
    }

    #[test]
    fn engine_agrees_with_closed_form() {
        let params = Fig1Params {
            grid: linspace(0.0, 2.0 * PI, 9),
            ..Fig1Params::default()
        };
        let rows = fig1_table(&params, &Engine::default()).unwrap();
        assert_eq!(rows.len(), 27);
        assert!(rows.iter().all(|r| r.residual < 1e-12), "{rows:?}");
    }

    #[test]
    fn pure_environment_entanglement_is_sine_squared() {
        let params = Fig2Params {
            c0_values: vec![1.0],
            grid: linspace(0.0, PI, 13),
        };
        for row in fig2_table(&params, &Engine::default()).unwrap() {
            assert!((row.e_phi - row.phase_t.sin().powi(2)).abs() < 1e-12, "{row:?}");
            assert!(row.e_psi.abs() < 1e-12);
            assert!(row.residual < 1e-12);
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 2.0, 5);
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
        assert_eq!(linspace(3.0, 4.0, 1), vec![3.0]);
    }
}
