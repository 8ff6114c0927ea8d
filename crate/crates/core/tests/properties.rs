//! Randomized invariants of the linear-algebra kernel and the entanglement
//! measure. Matrices are drawn from a seeded generator so that every
//! shrunk counterexample is reproducible from the printed seed.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qe_teleport::entanglement::{dephasing_entanglement, separability_check};
use qe_teleport::linalg::{expm_unitary, herm_eig, kron, sqrt_psd, uhlmann_fidelity, ComplexMatrix};
use qe_teleport::model::{BlockState, PureQubit};
use qe_teleport::oracle::{random_density, random_hermitian, random_qubit, random_unitary};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn general(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    // a Hermitian plus i times a Hermitian covers every square matrix
    let h = random_hermitian(rng, dim, 1.0);
    let k = random_hermitian(rng, dim, 1.0);
    &h + &k.scale(Complex64::new(0.0, 1.0))
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

/// `Σ c_i c_j* U_i ρ U_j†` on one pointer qubit.
fn pointer_state(psi: &PureQubit, env: &ComplexMatrix, u: [&ComplexMatrix; 2]) -> BlockState {
    let c = psi.amplitudes();
    let labels = ["0", "1"];
    let mut entries = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let block = (&(u[i] * env) * &u[j].adjoint()).scale(c[i] * c[j].conj());
            entries.push((labels[i], labels[j], block));
        }
    }
    BlockState::from_label_map(&["C"], env.dim(), &entries).unwrap()
}

/// A unitary that commutes with `env`: random phases in its eigenbasis.
fn commuting_unitary(rng: &mut ChaCha8Rng, env: &ComplexMatrix) -> ComplexMatrix {
    use rand::Rng;
    let (_, basis) = herm_eig(env).unwrap();
    let phases: Vec<Complex64> = (0..env.dim())
        .map(|_| Complex64::from_polar(1.0, rng.random_range(-3.0..3.0)))
        .collect();
    basis.conjugate(&ComplexMatrix::from_diag(&phases))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut r = rng(seed);
        let (a, b, c) = (general(&mut r, da), general(&mut r, db), general(&mut r, dc));
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(diff(&left, &right) < 1e-12);
    }

    #[test]
    fn kron_is_bilinear(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let (a1, a2, b) = (general(&mut r, da), general(&mut r, da), general(&mut r, db));
        let lhs = kron(&(&a1 + &a2.scale_real(s)), &b);
        let rhs = &kron(&a1, &b) + &kron(&a2, &b).scale_real(s);
        prop_assert!(diff(&lhs, &rhs) < 1e-11);
    }

    #[test]
    fn kron_trace_factorizes(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let (a, b) = (general(&mut r, da), general(&mut r, db));
        let product = a.trace() * b.trace();
        prop_assert!((kron(&a, &b).trace() - product).norm() < 1e-11 * (1.0 + product.norm()));
    }

    #[test]
    fn exponential_is_additive_in_time(seed in any::<u64>(), d in 1usize..6, s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, d, 1.0);
        let us = expm_unitary(&h, s, 1.0).unwrap();
        let ut = expm_unitary(&h, t, 1.0).unwrap();
        let ust = expm_unitary(&h, s + t, 1.0).unwrap();
        prop_assert!(diff(&(&us * &ut), &ust) < 1e-11);
        prop_assert!(us.unitarity_error() < 1e-12);
    }

    #[test]
    fn square_root_squares_back(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, d);
        let root = sqrt_psd(rho.matrix()).unwrap();
        prop_assert!(root.is_psd(1e-12));
        prop_assert!(diff(&(&root * &root), rho.matrix()) < 1e-12);
    }

    #[test]
    fn fidelity_is_bounded_and_symmetric(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, d), random_density(&mut r, d));
        let fab = uhlmann_fidelity(a.matrix(), b.matrix()).unwrap();
        let fba = uhlmann_fidelity(b.matrix(), a.matrix()).unwrap();
        prop_assert!((0.0..=1.0).contains(&fab));
        prop_assert!((fab - fba).abs() < 1e-12);
        prop_assert!((uhlmann_fidelity(a.matrix(), a.matrix()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_matches_nested_square_roots(seed in any::<u64>(), d in 1usize..6) {
        // full-rank inputs, where the textbook nested form is well conditioned
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, d), random_density(&mut r, d));
        let sa = sqrt_psd(a.matrix()).unwrap();
        let inner = (&(&sa * b.matrix()) * &sa).hermitian_part();
        let root_fidelity = sqrt_psd(&inner).unwrap().trace().re;
        let reference = root_fidelity * root_fidelity;
        prop_assert!((uhlmann_fidelity(a.matrix(), b.matrix()).unwrap() - reference).abs() < 1e-10);
    }

    #[test]
    fn fidelity_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..6) {
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, d), random_density(&mut r, d));
        let u = random_unitary(&mut r, d);
        let before = uhlmann_fidelity(a.matrix(), b.matrix()).unwrap();
        let after = uhlmann_fidelity(&u.conjugate(a.matrix()), &u.conjugate(b.matrix())).unwrap();
        prop_assert!((before - after).abs() < 1e-11);
    }

    #[test]
    fn entanglement_is_bounded_by_pointer_weight(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let psi = random_qubit(&mut r);
        let env = random_density(&mut r, d);
        let (u0, u1) = (random_unitary(&mut r, d), random_unitary(&mut r, d));
        let e = dephasing_entanglement(&pointer_state(&psi, env.matrix(), [&u0, &u1])).unwrap();
        prop_assert!(e >= -1e-12);
        prop_assert!(e <= psi.entanglement_weight() + 1e-12);
    }

    #[test]
    fn entanglement_ignores_environment_basis(seed in any::<u64>(), d in 1usize..5) {
        let mut r = rng(seed);
        let psi = random_qubit(&mut r);
        let env = random_density(&mut r, d);
        let (u0, u1, v) = (random_unitary(&mut r, d), random_unitary(&mut r, d), random_unitary(&mut r, d));
        let plain = dephasing_entanglement(&pointer_state(&psi, env.matrix(), [&u0, &u1])).unwrap();
        let rotated = dephasing_entanglement(&pointer_state(&psi, env.matrix(), [&(&v * &u0), &(&v * &u1)])).unwrap();
        prop_assert!((plain - rotated).abs() < 1e-10);
    }

    #[test]
    fn separability_agrees_with_vanishing_entanglement(seed in any::<u64>(), d in 2usize..5, commuting in any::<bool>()) {
        let mut r = rng(seed);
        let psi = random_qubit(&mut r);
        let env = random_density(&mut r, d);
        let u0 = random_unitary(&mut r, d);
        // u1 = u0 v with [v, env] = 0 leaves both conditional states equal
        let u1 = if commuting {
            &u0 * &commuting_unitary(&mut r, env.matrix())
        } else {
            random_unitary(&mut r, d)
        };
        let state = pointer_state(&psi, env.matrix(), [&u0, &u1]);
        let e = dephasing_entanglement(&state).unwrap();
        let (separable, _) = separability_check(&state, 1e-9).unwrap();
        prop_assert_eq!(separable, commuting);
        prop_assert_eq!(separable, e < 1e-9);
    }
}
