//! Randomized invariants of the block-state protocol engine.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qe_teleport::linalg::{herm_eig, kron, partial_trace, sqrt_psd, uhlmann_fidelity, ComplexMatrix};
use qe_teleport::model::{BellOutcome, EnvDensity};
use qe_teleport::oracle::{random_density, random_unitary, RandomInstance};
use qe_teleport::protocol::{Engine, SecondDephasing};

fn outcome(index: usize) -> BellOutcome {
    BellOutcome::ALL[index]
}

fn pure_environment(seed: u64, dim: usize) -> EnvDensity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(&mut rng, dim);
    let column: Vec<Complex64> = (0..dim).map(|i| u[(i, 0)]).collect();
    EnvDensity::pure(&column).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_stage_is_a_unit_trace_density(seed in any::<u64>(), d in 1usize..5, o1 in 0usize..4, o2 in 0usize..4) {
        let inst = RandomInstance::generate(seed, d);
        let second = SecondDephasing { interaction: &inst.interaction2, duration: inst.t };
        let trace = Engine::default()
            .run(&inst.psi, &inst.env, &inst.interaction1, inst.tau, Some(second), outcome(o1), outcome(o2))
            .unwrap();
        prop_assert_eq!(trace.stages.len(), 6);
        for stage in &trace.stages {
            prop_assert!((stage.state.trace().re - 1.0).abs() < 1e-12, "{} trace", stage.name);
            prop_assert!(stage.state.check_invariants(1e-10).is_ok(), "{} invalid", stage.name);
            if stage.outcome.is_some() {
                prop_assert!((stage.probability - 0.25).abs() < 1e-12, "{} p={}", stage.name, stage.probability);
            }
        }
    }

    #[test]
    fn pure_inputs_stay_pure(seed in any::<u64>(), d in 1usize..5, o1 in 0usize..4, o2 in 0usize..4) {
        let inst = RandomInstance::generate(seed, d);
        let env = pure_environment(seed.wrapping_add(1), d);
        let second = SecondDephasing { interaction: &inst.interaction2, duration: inst.t };
        let trace = Engine::default()
            .run(&inst.psi, &env, &inst.interaction1, inst.tau, Some(second), outcome(o1), outcome(o2))
            .unwrap();
        for stage in &trace.stages {
            let purity = stage.state.to_full().purity();
            prop_assert!((purity - 1.0).abs() < 1e-10, "{} purity {}", stage.name, purity);
        }
    }

    #[test]
    fn return_trip_restores_the_forward_state(seed in any::<u64>(), d in 1usize..5, o1 in 0usize..4, o2 in 0usize..4) {
        let inst = RandomInstance::generate(seed, d);
        let trace = Engine::default()
            .run(&inst.psi, &inst.env, &inst.interaction1, inst.tau, None, outcome(o1), outcome(o2))
            .unwrap();
        let ce = trace.get("step1").unwrap().state.reduce(&["C"]).unwrap().to_full();
        let ae = trace.get("step2_clean").unwrap().state.reduce(&["A"]).unwrap().to_full();
        prop_assert!((&ce - &ae).op_norm() < 1e-12);
    }

    #[test]
    fn dephasing_preserves_trace_and_spectrum(seed in any::<u64>(), d in 1usize..5) {
        // the conditional evolution is one joint unitary on qubits and environment
        let inst = RandomInstance::generate(seed, d);
        let trace = Engine::default()
            .run(&inst.psi, &inst.env, &inst.interaction1, inst.tau, None, BellOutcome::PhiPlus, BellOutcome::PhiPlus)
            .unwrap();
        let before = trace.get("initial").unwrap().state.to_full();
        let after = trace.get("dephased").unwrap().state.to_full();
        prop_assert!((before.trace() - after.trace()).norm() < 1e-12);
        let (eb, _) = herm_eig(&before).unwrap();
        let (ea, _) = herm_eig(&after).unwrap();
        for (x, y) in eb.iter().zip(&ea) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_over_everything_is_the_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_density(&mut rng, da), random_density(&mut rng, db));
        let ab = kron(a.matrix(), b.matrix());
        let scalar = partial_trace(&ab, &[da, db], &[]).unwrap();
        prop_assert_eq!(scalar.dim(), 1);
        prop_assert!((scalar[(0, 0)] - ab.trace()).norm() < 1e-12);
        prop_assert!((&partial_trace(&ab, &[da, db], &[0]).unwrap() - a.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn square_root_commutes_with_its_argument(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(&mut rng, d);
        let root = sqrt_psd(rho.matrix()).unwrap();
        let commutator = &(&root * rho.matrix()) - &(rho.matrix() * &root);
        prop_assert!(commutator.max_abs() < 1e-9);
    }

    #[test]
    fn commuting_fidelity_is_the_classical_overlap(p in proptest::collection::vec(0.0f64..1.0, 1..6), q_seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(q_seed);
        let q: Vec<f64> = p.iter().map(|_| rng.random_range(0.0..1.0)).collect();
        let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
        prop_assume!(sp > 1e-3 && sq > 1e-3);
        let p: Vec<f64> = p.iter().map(|x| x / sp).collect();
        let q: Vec<f64> = q.iter().map(|x| x / sq).collect();
        let bhattacharyya: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        let f = uhlmann_fidelity(&ComplexMatrix::from_real_diag(&p), &ComplexMatrix::from_real_diag(&q)).unwrap();
        prop_assert!((f - bhattacharyya * bhattacharyya).abs() < 1e-12);
    }
}
