//! Teleportation stages on block states with the environment kept exactly.
//!
//! Register order is `A, B, C`. Qubit A starts in the unknown state, B and C
//! share `|Φ+>`. The forward step dephases B,C, measures A,B in the Bell
//! basis and corrects C; the return step optionally dephases A,B, measures
//! B,C and corrects A.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::model::{initial_state, BellOutcome, BlockState, DephasingInteraction, EnvDensity, PureQubit};

/// Outcome probabilities below this are treated as impossible branches.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-14;
/// Tolerance for the structural checks run on every produced state in debug builds.
pub const STATE_CHECK_TOL: f64 = 1e-9;

/// The two outcome families that give distinct states after a noisy return step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Phi,
    Psi,
}

impl Branch {
    pub fn of(outcome: BellOutcome) -> Self {
        if outcome.is_phi() {
            Self::Phi
        } else {
            Self::Psi
        }
    }

    /// The `+` member of the family.
    pub fn representative(self) -> BellOutcome {
        match self {
            Self::Phi => BellOutcome::PhiPlus,
            Self::Psi => BellOutcome::PsiPlus,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Phi => "phi",
            Self::Psi => "psi",
        })
    }
}

/// Which Pauli fixes up the receiving qubit after each Bell outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionConvention {
    /// `Φ+ -> I`, `Φ- -> Z`, `Ψ+ -> X`, `Ψ- -> Z·X`.
    #[default]
    Standard,
    /// Drops the `Z` after `Φ-`. Only useful as a negative control.
    Corrupted,
}

impl CorrectionConvention {
    pub fn correction(self, outcome: BellOutcome) -> ComplexMatrix {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2");
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        match (self, outcome) {
            (_, BellOutcome::PhiPlus) | (Self::Corrupted, BellOutcome::PhiMinus) => ComplexMatrix::identity(2),
            (Self::Standard, BellOutcome::PhiMinus) => z,
            (_, BellOutcome::PsiPlus) => x,
            (_, BellOutcome::PsiMinus) => &z * &x,
        }
    }
}

/// Local operator `P` on the first qubit with `|λ> = (P ⊗ I)|Φ+>` up to phase.
pub fn bell_frame(outcome: BellOutcome) -> ComplexMatrix {
    let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2");
    let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    match outcome {
        BellOutcome::PhiPlus => ComplexMatrix::identity(2),
        BellOutcome::PhiMinus => z,
        BellOutcome::PsiPlus => x,
        BellOutcome::PsiMinus => &x * &z,
    }
}

/// Identifies which Bell state the named pair occupies (weight within `1e-9` of one).
pub fn resource_state(state: &BlockState, pair: [&str; 2]) -> Result<BellOutcome> {
    let pair_state = state.reduce(&pair)?;
    let pair_qubits = crate::linalg::partial_trace(&pair_state.to_full(), &[4, state.env_dim()], &[0])?;
    BellOutcome::ALL
        .into_iter()
        .find(|o| {
            let v = o.vector();
            let weight: Complex64 = (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| v[i].conj() * pair_qubits[(i, j)] * v[j])
                .sum();
            (weight.re - 1.0).abs() < STATE_CHECK_TOL
        })
        .ok_or_else(|| Error::InvalidStructure(format!("qubits {} and {} are not in a Bell state", pair[0], pair[1])))
}

/// One recorded protocol stage.
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub state: BlockState,
    pub outcome: Option<BellOutcome>,
    pub probability: f64,
}

/// Audit trail `initial -> dephased -> step1 -> step2_clean [-> redephased -> step2_noisy]`.
#[derive(Debug, Clone, Default)]
pub struct StageTrace {
    pub stages: Vec<Stage>,
}

impl StageTrace {
    pub fn get(&self, name: &str) -> Option<&Stage> {
        self.stages.iter().find(|s| s.name == name)
    }

    fn push(&mut self, name: &'static str, state: BlockState, outcome: Option<BellOutcome>, probability: f64) {
        self.stages.push(Stage {
            name,
            state,
            outcome,
            probability,
        });
    }
}

/// Optional second dephasing window before the return teleportation.
#[derive(Debug, Clone, Copy)]
pub struct SecondDephasing<'a> {
    pub interaction: &'a DephasingInteraction,
    pub duration: f64,
}

fn checked(state: BlockState) -> Result<BlockState> {
    if cfg!(debug_assertions) {
        state.check_structure(STATE_CHECK_TOL)?;
    }
    Ok(state)
}

/// Applies the conditional evolution of `interaction` on the named qubit pair:
/// `block(L, L') -> w_{L|pair} block(L, L') w_{L'|pair}^dagger`.
pub fn dephase(
    state: &BlockState,
    interaction: &DephasingInteraction,
    targets: [&str; 2],
    duration: f64,
) -> Result<BlockState> {
    if interaction.width() != targets.len() {
        return Err(Error::InvalidParameter(format!(
            "interaction labels have {} bits, {} target qubits given",
            interaction.width(),
            targets.len()
        )));
    }
    if interaction.env_dim() != state.env_dim() {
        return Err(Error::DimensionMismatch(format!(
            "interaction acts on dimension {}, state environment has {}",
            interaction.env_dim(),
            state.env_dim()
        )));
    }
    let width = targets.len();
    let out = state.conjugate_conditional(&targets, |sub| {
        interaction.conditional_unitary(&format!("{sub:0width$b}"), duration)
    })?;
    checked(out)
}

/// Projects the named pair onto one Bell vector and renormalizes.
pub fn bell_measure(state: &BlockState, pair: [&str; 2], outcome: BellOutcome) -> Result<(f64, BlockState)> {
    let projected = state.transform(&outcome.projector(), &pair)?;
    let probability = projected.trace().re;
    if probability < IMPOSSIBLE_PROBABILITY {
        return Err(Error::ImpossibleOutcome {
            outcome: outcome.to_string(),
            probability,
        });
    }
    Ok((probability, checked(projected.scaled(1.0 / probability))?))
}

/// Standard-convention correction on `target`.
pub fn pauli_correct(state: &BlockState, outcome: BellOutcome, target: &str) -> Result<BlockState> {
    Engine::default().pauli_correct(state, outcome, target)
}

/// Degree of coherence `c = Tr_E R_01` of a dephased `|Φ+>`-type pair: the
/// pair is isolated by tracing out every other qubit, which must leave
/// weight 1/2 on each of `00` and `11` and nothing elsewhere.
pub fn bell_coherence(state: &BlockState, pair: [&str; 2]) -> Result<Complex64> {
    let reduced = state.reduce(&pair)?;
    let labels = reduced.label_strings();
    let pos = |l: &str| labels.iter().position(|x| x == l);
    let (Some(i00), Some(i11)) = (pos("00"), pos("11")) else {
        return Err(Error::InvalidStructure("pair does not occupy both 00 and 11".into()));
    };
    for (i, l) in labels.iter().enumerate() {
        let weight = reduced.block(i, i).trace().re;
        let expected = if i == i00 || i == i11 { 0.5 } else { 0.0 };
        if (weight - expected).abs() > STATE_CHECK_TOL {
            return Err(Error::InvalidStructure(format!(
                "pair label {l} has weight {weight}, expected {expected}"
            )));
        }
    }
    Ok(reduced.block(i00, i11).trace() * 2.0)
}

/// Dephasing factor of a qubit ⊗ environment state `[[|a|^2 R00, a b* X], ...]`:
/// `Tr_E(block_01) / (alpha conj(beta))`.
pub fn qubit_coherence(rho_qe: &BlockState, psi: &PureQubit) -> Result<Complex64> {
    if rho_qe.num_qubits() != 1 {
        return Err(Error::InvalidStructure(format!(
            "expected a single qubit with its environment, got {} qubits",
            rho_qe.num_qubits()
        )));
    }
    let off = rho_qe
        .block_for("0", "1")
        .ok_or_else(|| Error::InvalidStructure("state lacks one of the qubit labels".into()))?;
    let weight = psi.alpha() * psi.beta().conj();
    if weight.norm() < IMPOSSIBLE_PROBABILITY {
        return Err(Error::InvalidParameter(
            "qubit has no coherence to compare against (alpha or beta is zero)".into(),
        ));
    }
    Ok(off.trace() / weight)
}

/// Teleportation engine parameterized by its correction convention.
#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    pub convention: CorrectionConvention,
}

impl Engine {
    pub fn new(convention: CorrectionConvention) -> Self {
        Self { convention }
    }

    pub fn pauli_correct(&self, state: &BlockState, outcome: BellOutcome, target: &str) -> Result<BlockState> {
        if outcome == BellOutcome::PhiPlus {
            state.qubit_index(target)?;
            return Ok(state.clone());
        }
        checked(state.transform(&self.convention.correction(outcome), &[target])?)
    }

    /// Prepares the initial state, dephases B,C for `tau`, measures A,B and
    /// corrects C.
    pub fn step1(
        &self,
        psi: &PureQubit,
        env: &EnvDensity,
        interaction: &DephasingInteraction,
        tau: f64,
        outcome: BellOutcome,
    ) -> Result<(f64, BlockState)> {
        let dephased = dephase(&initial_state(psi, env), interaction, ["B", "C"], tau)?;
        self.forward(&dephased, outcome)
    }

    fn forward(&self, dephased: &BlockState, outcome: BellOutcome) -> Result<(f64, BlockState)> {
        let (p, measured) = bell_measure(dephased, ["A", "B"], outcome)?;
        Ok((p, self.pauli_correct(&measured, outcome, "C")?))
    }

    /// Teleports C back to A through the A,B pair, which was left in the Bell
    /// state `resource` by the forward step: measures B,C and applies
    /// `correction(outcome) · P_resource^dagger` on A.
    pub fn step2(&self, state: &BlockState, resource: BellOutcome, outcome: BellOutcome) -> Result<(f64, BlockState)> {
        let (p, measured) = bell_measure(state, ["B", "C"], outcome)?;
        if resource == BellOutcome::PhiPlus {
            return Ok((p, self.pauli_correct(&measured, outcome, "A")?));
        }
        let fix = &self.convention.correction(outcome) * &bell_frame(resource).adjoint();
        Ok((p, checked(measured.transform(&fix, &["A"])?)?))
    }

    /// [`step2`](Self::step2) with the A,B resource read off the state itself.
    pub fn step2_clean(&self, sigma_pm: &BlockState, outcome: BellOutcome) -> Result<(f64, BlockState)> {
        let resource = resource_state(sigma_pm, ["A", "B"])?;
        self.step2(sigma_pm, resource, outcome)
    }

    /// Return teleportation after a second dephasing window on a `|Φ+>` A,B
    /// resource. The outcome now selects between two distinct A ⊗ E states.
    pub fn step2_noisy(&self, sigma_prime: &BlockState, outcome: BellOutcome) -> Result<(f64, BlockState)> {
        self.step2(sigma_prime, BellOutcome::PhiPlus, outcome)
    }

    /// Runs every stage and records it.
    #[allow(clippy::too_many_arguments)]
    pub fn run(
        &self,
        psi: &PureQubit,
        env: &EnvDensity,
        interaction: &DephasingInteraction,
        tau: f64,
        second: Option<SecondDephasing<'_>>,
        first_outcome: BellOutcome,
        second_outcome: BellOutcome,
    ) -> Result<StageTrace> {
        let mut trace = StageTrace::default();
        let initial = initial_state(psi, env);
        let dephased = dephase(&initial, interaction, ["B", "C"], tau)?;
        let (p1, sigma_pm) = self.forward(&dephased, first_outcome)?;
        let (p2, sigma_pm2) = self.step2(&sigma_pm, first_outcome, second_outcome)?;
        trace.push("initial", initial, None, 1.0);
        trace.push("dephased", dephased, None, 1.0);
        trace.push("step1", sigma_pm.clone(), Some(first_outcome), p1);
        trace.push("step2_clean", sigma_pm2, Some(second_outcome), p2);
        if let Some(second) = second {
            let sigma_prime = redephase(&sigma_pm, second.interaction, second.duration)?;
            let (p3, noisy) = self.step2(&sigma_prime, first_outcome, second_outcome)?;
            trace.push("redephased", sigma_prime, None, 1.0);
            trace.push("step2_noisy", noisy, Some(second_outcome), p3);
        }
        Ok(trace)
    }
}

/// See [`Engine::step1`].
pub fn step1(
    psi: &PureQubit,
    env: &EnvDensity,
    interaction: &DephasingInteraction,
    tau: f64,
    outcome: BellOutcome,
) -> Result<(f64, BlockState)> {
    Engine::default().step1(psi, env, interaction, tau, outcome)
}

/// See [`Engine::step2_clean`].
pub fn step2_clean(sigma_pm: &BlockState, outcome: BellOutcome) -> Result<(f64, BlockState)> {
    Engine::default().step2_clean(sigma_pm, outcome)
}

/// Second dephasing window on A,B: `R^{kq}_{ij} = w'_kk R_ij w'_qq^dagger`.
pub fn redephase(sigma_pm: &BlockState, interaction2: &DephasingInteraction, t: f64) -> Result<BlockState> {
    dephase(sigma_pm, interaction2, ["A", "B"], t)
}

/// See [`Engine::step2_noisy`].
pub fn step2_noisy(sigma_prime: &BlockState, outcome: BellOutcome) -> Result<(f64, BlockState)> {
    Engine::default().step2_noisy(sigma_prime, outcome)
}

/// Runs all stages with the standard convention.
pub fn run_protocol(
    psi: &PureQubit,
    env: &EnvDensity,
    interaction: &DephasingInteraction,
    tau: f64,
    second: Option<SecondDephasing<'_>>,
    first_outcome: BellOutcome,
    second_outcome: BellOutcome,
) -> Result<StageTrace> {
    Engine::default().run(psi, env, interaction, tau, second, first_outcome, second_outcome)
}
