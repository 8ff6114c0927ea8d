//! Dense reference simulator over the full `8 · d_E` dimensional space.
//!
//! Everything here is built from Kronecker products and matrix products of
//! explicitly written operators. Nothing is shared with the block engine
//! except the `linalg` kernel, so agreement between the two is evidence that
//! both are right.

mod random;

pub use random::{
    random_density, random_hermitian, random_interaction, random_qubit, random_unitary, separable_interaction,
    RandomInstance,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, kron_all, partial_trace, ComplexMatrix};
use crate::model::{BellOutcome, ConditionalOp, DephasingInteraction, EnvDensity, PureQubit};

/// Largest environment the oracle accepts.
pub const MAX_ENV_DIM: usize = 16;
const DENSITY_TOL: f64 = 1e-10;

/// Density matrix of `A ⊗ B ⊗ C ⊗ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub matrix: ComplexMatrix,
    pub env_dim: usize,
}

impl FullState {
    pub const REGISTER: [&'static str; 3] = ["A", "B", "C"];

    /// Traces out every qubit not in `keep` (indices into `A, B, C`); the
    /// environment is kept as the last factor.
    pub fn reduce(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        let mut factors: Vec<usize> = keep.to_vec();
        factors.push(3);
        partial_trace(&self.matrix, &[2, 2, 2, self.env_dim], &factors)
    }

    pub fn is_density(&self) -> bool {
        self.matrix.is_density(DENSITY_TOL)
    }
}

/// One emitted stage.
#[derive(Debug, Clone)]
pub struct OracleStage {
    pub name: &'static str,
    pub state: FullState,
    /// Probability of the outcome that produced this stage (1 otherwise).
    pub probability: f64,
}

/// All stages of a run plus the full outcome distributions of each measurement.
#[derive(Debug, Clone, Default)]
pub struct OracleRun {
    pub stages: Vec<OracleStage>,
    /// `(stage name, [p(Φ+), p(Φ-), p(Ψ+), p(Ψ-)])` for every measurement.
    pub distributions: Vec<(&'static str, [f64; 4])>,
}

impl OracleRun {
    pub fn get(&self, name: &str) -> Option<&OracleStage> {
        self.stages.iter().find(|s| s.name == name)
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn id2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]).expect("2x2")
}

fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)]]).expect("2x2")
}

fn ket(bits: [usize; 2]) -> ComplexMatrix {
    // |b0 b1><b0 b1| as a 4x4 projector
    let e = |b: usize| {
        let mut m = ComplexMatrix::zeros(2);
        m[(b, b)] = c(1.0);
        m
    };
    kron_all(&[&e(bits[0]), &e(bits[1])])
}

fn bell_vector(outcome: BellOutcome) -> [f64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match outcome {
        BellOutcome::PhiPlus => [h, 0.0, 0.0, h],
        BellOutcome::PhiMinus => [h, 0.0, 0.0, -h],
        BellOutcome::PsiPlus => [0.0, h, h, 0.0],
        BellOutcome::PsiMinus => [0.0, h, -h, 0.0],
    }
}

fn bell_projector(outcome: BellOutcome) -> ComplexMatrix {
    let v = bell_vector(outcome);
    let mut p = ComplexMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            p[(i, j)] = c(v[i] * v[j]);
        }
    }
    p
}

/// Receiver correction for a Bell outcome of a `|Φ+>` resource.
fn correction(outcome: BellOutcome) -> ComplexMatrix {
    match outcome {
        BellOutcome::PhiPlus => id2(),
        BellOutcome::PhiMinus => pauli_z(),
        BellOutcome::PsiPlus => pauli_x(),
        BellOutcome::PsiMinus => &pauli_z() * &pauli_x(),
    }
}

/// Inverse of the local operator on the first qubit that turns `|Φ+>` into
/// the given Bell state.
fn resource_undo(resource: BellOutcome) -> ComplexMatrix {
    match resource {
        BellOutcome::PhiPlus => id2(),
        BellOutcome::PhiMinus => pauli_z(),
        BellOutcome::PsiPlus => pauli_x(),
        BellOutcome::PsiMinus => &pauli_z() * &pauli_x(),
    }
}

fn conditional(interaction: &DephasingInteraction, label: &str, duration: f64) -> Result<ComplexMatrix> {
    match interaction.op(label) {
        Some(ConditionalOp::Generator(v)) => expm_unitary(v, duration, 1.0),
        Some(ConditionalOp::Unitary(w)) => Ok(w.clone()),
        None => Err(Error::MissingConditionalOp(label.to_string())),
    }
}

/// Which pair of `A, B, C` a two-qubit operator acts on.
#[derive(Clone, Copy)]
enum Pair {
    AB,
    BC,
}

/// Embeds a 4x4 pair operator and a `d_E`-dim environment operator.
fn embed(pair: Pair, op: &ComplexMatrix, env: &ComplexMatrix) -> ComplexMatrix {
    match pair {
        Pair::AB => kron_all(&[op, &id2(), env]),
        Pair::BC => kron_all(&[&id2(), op, env]),
    }
}

/// `Σ_ij |ij><ij| ⊗ w_ij` on the pair, identity on the third qubit. All four
/// labels must be present.
fn dephasing_unitary(
    pair: Pair,
    interaction: &DephasingInteraction,
    duration: f64,
    env_dim: usize,
) -> Result<ComplexMatrix> {
    if interaction.width() != 2 || interaction.env_dim() != env_dim {
        return Err(Error::DimensionMismatch(format!(
            "oracle needs a two-qubit interaction on dimension {env_dim}"
        )));
    }
    let mut u = ComplexMatrix::zeros(8 * env_dim);
    for i in 0..2 {
        for j in 0..2 {
            let w = conditional(interaction, &format!("{i}{j}"), duration)?;
            u = &u + &embed(pair, &ket([i, j]), &w);
        }
    }
    Ok(u)
}

fn evolve(state: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    &(u * state) * &u.adjoint()
}

fn measure(state: &ComplexMatrix, pair: Pair, env_dim: usize) -> [f64; 4] {
    BellOutcome::ALL.map(|o| {
        (&embed(pair, &bell_projector(o), &ComplexMatrix::identity(env_dim)) * state)
            .trace()
            .re
    })
}

fn project(state: &ComplexMatrix, pair: Pair, outcome: BellOutcome, env_dim: usize) -> Result<(f64, ComplexMatrix)> {
    let p = embed(pair, &bell_projector(outcome), &ComplexMatrix::identity(env_dim));
    let projected = &(&p * state) * &p;
    let probability = projected.trace().re;
    if probability < 1e-14 {
        return Err(Error::ImpossibleOutcome {
            outcome: outcome.to_string(),
            probability,
        });
    }
    Ok((probability, projected.scale_real(1.0 / probability)))
}

fn local(qubit: usize, op: &ComplexMatrix, env_dim: usize) -> ComplexMatrix {
    let mut factors = [id2(), id2(), id2()];
    factors[qubit] = op.clone();
    kron_all(&[&factors[0], &factors[1], &factors[2], &ComplexMatrix::identity(env_dim)])
}

/// Dense run of the protocol. Stages: `initial`, `dephased`, `step1`,
/// `step2_clean` and, with a second window, `redephased`, `step2_noisy`.
#[allow(clippy::too_many_arguments)]
pub fn full_run(
    psi: &PureQubit,
    env: &EnvDensity,
    interaction1: &DephasingInteraction,
    tau: f64,
    interaction2: Option<&DephasingInteraction>,
    t: f64,
    outcome1: BellOutcome,
    outcome2: BellOutcome,
) -> Result<OracleRun> {
    let d = env.dim();
    if d > MAX_ENV_DIM {
        return Err(Error::EnvironmentTooLarge {
            dim: d,
            limit: MAX_ENV_DIM,
        });
    }
    let mut run = OracleRun::default();
    let emit = |run: &mut OracleRun, name, matrix: ComplexMatrix, probability| {
        run.stages.push(OracleStage {
            name,
            state: FullState { matrix, env_dim: d },
            probability,
        });
    };

    // |ψ>_A ⊗ |Φ+>_BC as a column, then the projector, then ⊗ R(0)
    let amps = psi.amplitudes();
    let bell = bell_vector(BellOutcome::PhiPlus);
    let mut abc = [Complex64::new(0.0, 0.0); 8];
    for a in 0..2 {
        for bc in 0..4 {
            abc[a * 4 + bc] = amps[a] * bell[bc];
        }
    }
    let initial = kron_all(&[&ComplexMatrix::projector(&abc)?, env.matrix()]);
    emit(&mut run, "initial", initial.clone(), 1.0);

    let dephased = evolve(&initial, &dephasing_unitary(Pair::BC, interaction1, tau, d)?);
    emit(&mut run, "dephased", dephased.clone(), 1.0);

    run.distributions.push(("step1", measure(&dephased, Pair::AB, d)));
    let (p1, measured) = project(&dephased, Pair::AB, outcome1, d)?;
    let sigma_pm = evolve(&measured, &local(2, &correction(outcome1), d));
    emit(&mut run, "step1", sigma_pm.clone(), p1);

    let back = &correction(outcome2) * &resource_undo(outcome1);
    run.distributions.push(("step2_clean", measure(&sigma_pm, Pair::BC, d)));
    let (p2, measured) = project(&sigma_pm, Pair::BC, outcome2, d)?;
    emit(&mut run, "step2_clean", evolve(&measured, &local(0, &back, d)), p2);

    if let Some(interaction2) = interaction2 {
        let redephased = evolve(&sigma_pm, &dephasing_unitary(Pair::AB, interaction2, t, d)?);
        emit(&mut run, "redephased", redephased.clone(), 1.0);
        run.distributions
            .push(("step2_noisy", measure(&redephased, Pair::BC, d)));
        let (p3, measured) = project(&redephased, Pair::BC, outcome2, d)?;
        emit(&mut run, "step2_noisy", evolve(&measured, &local(0, &back, d)), p3);
    }
    Ok(run)
}
