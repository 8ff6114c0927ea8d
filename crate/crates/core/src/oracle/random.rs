use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{herm_eig, ComplexMatrix};
use crate::model::{ConditionalOp, DephasingInteraction, EnvDensity, PureQubit};

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let data = (0..dim * dim).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_vec(dim, data).expect("square data")
}

/// Haar-distributed unitary: Gram–Schmidt on the columns of a complex
/// Gaussian matrix (the positive-diagonal QR convention).
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim);
    let mut q = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let mut v: Vec<Complex64> = (0..dim).map(|i| g[(i, col)]).collect();
        // modified Gram-Schmidt, applied twice for orthogonality to ~1e-16
        for _ in 0..2 {
            for prev in 0..col {
                let overlap: Complex64 = (0..dim).map(|i| q[(i, prev)].conj() * v[i]).sum();
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi -= overlap * q[(i, prev)];
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (i, vi) in v.iter().enumerate() {
            q[(i, col)] = vi / norm;
        }
    }
    q
}

/// `A A† / Tr(A A†)` for a complex Gaussian `A`; full rank almost surely.
pub fn random_density<R: Rng>(rng: &mut R, dim: usize) -> EnvDensity {
    let a = gaussian_matrix(rng, dim);
    let aat = &a * &a.adjoint();
    let trace = aat.trace().re;
    EnvDensity::new(aat.scale_real(1.0 / trace).hermitian_part()).expect("Gram matrix is a density")
}

/// Hermitian matrix with Gaussian entries, scaled by `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> ComplexMatrix {
    gaussian_matrix(rng, dim).hermitian_part().scale_real(scale)
}

/// Normalized qubit with Gaussian amplitudes.
pub fn random_qubit<R: Rng>(rng: &mut R) -> PureQubit {
    loop {
        if let Ok(q) = PureQubit::normalized(gaussian(rng), gaussian(rng)) {
            return q;
        }
    }
}

/// Two-qubit interaction with independent random conditional operators for
/// all four labels: Hermitian generators or fixed Haar unitaries.
pub fn random_interaction<R: Rng>(rng: &mut R, env_dim: usize, generators: bool) -> DephasingInteraction {
    let entries = ["00", "01", "10", "11"]
        .iter()
        .map(|label| {
            let op = if generators {
                ConditionalOp::Generator(random_hermitian(rng, env_dim, 1.0))
            } else {
                ConditionalOp::Unitary(random_unitary(rng, env_dim))
            };
            (label.to_string(), op)
        })
        .collect();
    DephasingInteraction::new(entries).expect("random operators are valid")
}

/// Interaction whose conditional unitaries all commute with `env`, so the
/// conditional environment states stay equal to `env` (no entanglement).
pub fn separable_interaction<R: Rng>(rng: &mut R, env: &EnvDensity) -> Result<DephasingInteraction> {
    let (_, basis) = herm_eig(env.matrix())?;
    let d = env.dim();
    let entries = ["00", "01", "10", "11"]
        .iter()
        .map(|label| {
            let phases: Vec<Complex64> = (0..d)
                .map(|_| Complex64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
                .collect();
            let w = basis.conjugate(&ComplexMatrix::from_diag(&phases));
            (label.to_string(), ConditionalOp::Unitary(w))
        })
        .collect();
    DephasingInteraction::new(entries)
}

/// A reproducible random protocol instance.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub seed: u64,
    pub psi: PureQubit,
    pub env: EnvDensity,
    pub interaction1: DephasingInteraction,
    pub tau: f64,
    pub interaction2: DephasingInteraction,
    pub t: f64,
}

impl RandomInstance {
    /// Generic instance: full-rank environment, first coupling from random
    /// generators, second coupling from random unitaries.
    pub fn generate(seed: u64, env_dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_qubit(&mut rng);
        let env = random_density(&mut rng, env_dim);
        let interaction1 = random_interaction(&mut rng, env_dim, true);
        let tau = rng.random_range(0.1..3.0);
        let interaction2 = random_interaction(&mut rng, env_dim, false);
        let t = rng.random_range(0.1..3.0);
        Self {
            seed,
            psi,
            env,
            interaction1,
            tau,
            interaction2,
            t,
        }
    }

    /// Like [`generate`](Self::generate) but the first coupling leaves the
    /// environment uncorrelated with the teleported qubit.
    pub fn generate_separable(seed: u64, env_dim: usize) -> Self {
        let mut inst = Self::generate(seed, env_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
        inst.interaction1 = separable_interaction(&mut rng, &inst.env).expect("environment is Hermitian");
        inst
    }

    /// Replaces `psi`; used for the `|0>`, `|1>` edge cases.
    pub fn with_psi(mut self, psi: PureQubit) -> Self {
        self.psi = psi;
        self
    }
}
