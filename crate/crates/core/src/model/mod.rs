//! Qubits, environments, dephasing couplings and block-structured states.

mod block;
mod interaction;
mod qubit;

use num_complex::Complex64;

pub use block::{BlockState, LABEL_CUTOFF};
pub use interaction::{ConditionalOp, DephasingInteraction};
pub use qubit::{BellOutcome, EnvDensity, PureQubit};

/// Qubit names of the three-qubit register, in tensor order.
pub const REGISTER: [&str; 3] = ["A", "B", "C"];

/// `|psi><psi|_A ⊗ |Φ+><Φ+|_BC ⊗ R(0)` over labels `000, 011, 100, 111`.
pub fn initial_state(psi: &PureQubit, env: &EnvDensity) -> BlockState {
    let bell = std::f64::consts::FRAC_1_SQRT_2;
    let amps = psi.amplitudes();
    // label a·bc with bc ∈ {00, 11}: amplitude psi_a / sqrt(2)
    let support: Vec<(usize, Complex64)> = [(0b000, 0), (0b011, 0), (0b100, 1), (0b111, 1)]
        .iter()
        .map(|&(label, a)| (label, amps[a] * bell))
        .collect();
    let blocks = support
        .iter()
        .flat_map(|&(_, x)| support.iter().map(move |&(_, y)| x * y.conj()))
        .map(|coeff| env.matrix().scale(coeff))
        .collect();
    BlockState::new(
        REGISTER.iter().map(|s| s.to_string()).collect(),
        env.dim(),
        support.iter().map(|&(l, _)| l).collect(),
        blocks,
    )
    .expect("initial state layout is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron_all, partial_trace, ComplexMatrix};

    #[test]
    fn initial_state_fully_pure_case() {
        let env = EnvDensity::diagonal(&[1.0, 0.0]).unwrap();
        let s = initial_state(&PureQubit::zero(), &env);
        // (|000> + |011>)|0>_E / sqrt(2)
        let mut v = vec![Complex64::new(0.0, 0.0); 16];
        v[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[0b011 * 2] = v[0];
        let expected = ComplexMatrix::projector(&v).unwrap();
        assert!((&s.to_full() - &expected).max_abs() < 1e-15);
        assert_eq!(s.label_strings(), vec!["000", "011", "100", "111"]);
    }

    #[test]
    fn initial_state_traces_to_qubit_product() {
        let psi = PureQubit::normalized(Complex64::new(0.6, 0.1), Complex64::new(-0.3, 0.7)).unwrap();
        let env = EnvDensity::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let s = initial_state(&psi, &env);
        let qubits = partial_trace(&s.to_full(), &[8, 3], &[0]).unwrap();
        let bell = ComplexMatrix::projector(&BellOutcome::PhiPlus.vector()).unwrap();
        let expected = kron_all(&[&psi.density(), &bell]);
        assert!((&qubits - &expected).max_abs() < 1e-15);
        s.check_invariants(1e-10).unwrap();
    }
}
