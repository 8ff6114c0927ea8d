//! Qubit–environment entanglement for pure-dephasing states.
//!
//! A pure-dephasing state of one pointer pair and an environment looks like
//! `[[p0 ρ0, X], [X†, p1 ρ1]]` with `ρ0 = U0 R U0†`, `ρ1 = U1 R U1†` and
//! `X = sqrt(p0 p1) U0 R U1†`. For such states the entanglement is
//! `E = 4 p0 p1 [1 - F(ρ0, ρ1)]` and it vanishes exactly when `ρ0 = ρ1`.
//!
//! The functions here accept any two-label [`BlockState`] (a qubit with its
//! environment, or a `|Φ+>`-type pair reduced to its `00` and `11` labels).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, singular_values, uhlmann_fidelity, ComplexMatrix, PSD_CLAMP_TOL};
use crate::model::{BlockState, PureQubit};

/// Default operator-norm tolerance for `ρ0 = ρ1`.
pub const SEPARABILITY_ATOL: f64 = 1e-9;
/// Tolerance of [`entanglement_ratio_check`].
pub const RATIO_TOL: f64 = 1e-10;
/// Spectral tolerance of the pure-dephasing structure check.
pub const STRUCTURE_TOL: f64 = 1e-8;
/// Pointer weights at or below this count as empty branches.
const EMPTY_WEIGHT: f64 = 1e-14;

/// Weights and normalized conditional environment states of a two-label state.
#[derive(Debug, Clone)]
pub struct ConditionalStates {
    pub weights: [f64; 2],
    /// `None` for an empty branch.
    pub states: [Option<ComplexMatrix>; 2],
    /// The raw off-diagonal block `X`.
    pub off_diagonal: ComplexMatrix,
}

impl ConditionalStates {
    pub fn of(rho: &BlockState) -> Result<Self> {
        if rho.labels().len() != 2 {
            return Err(Error::InvalidStructure(format!(
                "expected exactly two pointer labels, found {:?}",
                rho.label_strings()
            )));
        }
        let weights = [rho.block(0, 0).trace().re, rho.block(1, 1).trace().re];
        if weights.iter().any(|&p| p < -PSD_CLAMP_TOL) {
            return Err(Error::NotPsd {
                min_eigenvalue: weights[0].min(weights[1]),
            });
        }
        let states = [0, 1].map(|i| (weights[i] > EMPTY_WEIGHT).then(|| rho.block(i, i).scale_real(1.0 / weights[i])));
        Ok(Self {
            weights,
            states,
            off_diagonal: rho.block(0, 1).clone(),
        })
    }

    fn both(&self) -> Option<(&ComplexMatrix, &ComplexMatrix)> {
        match &self.states {
            [Some(a), Some(b)] => Some((a, b)),
            _ => None,
        }
    }
}

/// Rejects states that are not of pure-dephasing form: both conditional
/// states must be PSD with one common spectrum, and the off-diagonal block
/// must carry singular values `sqrt(p0 p1)` times that spectrum.
pub fn validate_pure_dephasing(rho: &BlockState, tol: f64) -> Result<()> {
    let cond = ConditionalStates::of(rho)?;
    let Some((r0, r1)) = cond.both() else {
        return Ok(());
    };
    let (spec0, _) = herm_eig(r0)?;
    let (spec1, _) = herm_eig(r1)?;
    for spectrum in [&spec0, &spec1] {
        if let Some(&min) = spectrum.first() {
            if min < -PSD_CLAMP_TOL {
                return Err(Error::NotPsd { min_eigenvalue: min });
            }
        }
    }
    let spectral_gap = spec0.iter().zip(&spec1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if spectral_gap > tol {
        return Err(Error::InvalidStructure(format!(
            "conditional environment states have different spectra (gap {spectral_gap:.3e})"
        )));
    }
    let scale = (cond.weights[0] * cond.weights[1]).sqrt();
    let coherence_gap = singular_values(&cond.off_diagonal)
        .iter()
        .zip(spec0.iter().rev())
        .map(|(s, lambda)| (s / scale - lambda.max(0.0)).abs())
        .fold(0.0, f64::max);
    if coherence_gap > tol {
        return Err(Error::InvalidStructure(format!(
            "off-diagonal block is not a unitary image of the conditional states (gap {coherence_gap:.3e})"
        )));
    }
    Ok(())
}

/// `4 p0 p1 [1 - F(ρ0, ρ1)]`, zero when either pointer weight vanishes.
pub fn dephasing_entanglement(rho_qe: &BlockState) -> Result<f64> {
    validate_pure_dephasing(rho_qe, STRUCTURE_TOL)?;
    let cond = ConditionalStates::of(rho_qe)?;
    let Some((r0, r1)) = cond.both() else {
        return Ok(0.0);
    };
    let fidelity = uhlmann_fidelity(r0, r1)?;
    Ok(4.0 * cond.weights[0] * cond.weights[1] * (1.0 - fidelity))
}

/// `|e_ce - 4|α|²|β|² e_bce| < 1e-10`.
pub fn entanglement_ratio_check(e_ce: f64, e_bce: f64, psi: &PureQubit) -> bool {
    (e_ce - psi.entanglement_weight() * e_bce).abs() < RATIO_TOL
}

/// Separable iff `‖ρ0 - ρ1‖_op ≤ atol`; the residual is that norm. A state
/// with an empty branch is a product state and reports residual 0.
pub fn separability_check(rho_qe: &BlockState, atol: f64) -> Result<(bool, f64)> {
    let cond = ConditionalStates::of(rho_qe)?;
    let residual = match cond.both() {
        Some((r0, r1)) => (r0 - r1).op_norm(),
        None => 0.0,
    };
    Ok((residual <= atol, residual))
}

/// Summary of the correlations between a pointer pair and the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub entanglement: f64,
    pub separable: bool,
    /// `F(ρ0, ρ1)`; 1 for an empty branch.
    pub fidelity_term: f64,
    /// `Tr X / sqrt(p0 p1)`: the coherence factor times the phase of the
    /// pointer amplitudes. Zero for an empty branch.
    pub coherence: Complex64,
    /// `‖ρ0 - ρ1‖_op`.
    pub condition_residual: f64,
    pub weights: [f64; 2],
}

impl CorrelationReport {
    pub fn of(rho_qe: &BlockState, atol: f64) -> Result<Self> {
        validate_pure_dephasing(rho_qe, STRUCTURE_TOL)?;
        let cond = ConditionalStates::of(rho_qe)?;
        let (separable, condition_residual) = separability_check(rho_qe, atol)?;
        let weight = 4.0 * cond.weights[0] * cond.weights[1];
        let (fidelity_term, coherence) = match cond.both() {
            Some((r0, r1)) => (
                uhlmann_fidelity(r0, r1)?,
                cond.off_diagonal.trace() / (cond.weights[0] * cond.weights[1]).sqrt(),
            ),
            None => (1.0, Complex64::new(0.0, 0.0)),
        };
        Ok(Self {
            entanglement: weight * (1.0 - fidelity_term),
            separable,
            fidelity_term,
            coherence,
            condition_residual,
            weights: cond.weights,
        })
    }
}
