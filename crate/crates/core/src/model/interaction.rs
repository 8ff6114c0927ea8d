use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, ComplexMatrix};

const OP_TOL: f64 = 1e-10;

/// Environment operator attached to one pointer-basis label.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalOp {
    /// Hermitian `V`; evolves as `exp(-i V t)` (hbar = 1).
    Generator(ComplexMatrix),
    /// Fixed unitary `w`, independent of the evolution time.
    Unitary(ComplexMatrix),
}

impl ConditionalOp {
    fn matrix(&self) -> &ComplexMatrix {
        match self {
            Self::Generator(m) | Self::Unitary(m) => m,
        }
    }

    /// The conditional evolution operator after `duration`.
    pub fn evolve(&self, duration: f64) -> Result<ComplexMatrix> {
        match self {
            Self::Generator(v) => expm_unitary(v, duration, 1.0),
            Self::Unitary(w) => Ok(w.clone()),
        }
    }
}

/// Pure-dephasing coupling: one environment operator per pointer label of
/// the qubits it acts on (`Σ |l><l| ⊗ V_l`).
#[derive(Debug, Clone, PartialEq)]
pub struct DephasingInteraction {
    width: usize,
    env_dim: usize,
    entries: Vec<(String, ConditionalOp)>,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || !label.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

impl DephasingInteraction {
    pub fn new(entries: Vec<(String, ConditionalOp)>) -> Result<Self> {
        let (first_label, first_op) = entries
            .first()
            .ok_or_else(|| Error::InvalidParameter("interaction needs at least one label".into()))?;
        let width = first_label.len();
        let env_dim = first_op.matrix().dim();

        for (i, (label, op)) in entries.iter().enumerate() {
            check_label(label)?;
            if label.len() != width {
                return Err(Error::InvalidLabel(format!("{label} (expected {width} bits)")));
            }
            if entries[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::InvalidLabel(format!("{label} (duplicate)")));
            }
            if op.matrix().dim() != env_dim {
                return Err(Error::DimensionMismatch(format!(
                    "operator for {label} is {0}x{0}, expected {env_dim}x{env_dim}",
                    op.matrix().dim()
                )));
            }
            match op {
                ConditionalOp::Generator(v) => {
                    let deviation = v.hermiticity_error();
                    if deviation > OP_TOL {
                        return Err(Error::NotHermitian { deviation });
                    }
                }
                ConditionalOp::Unitary(w) => {
                    let deviation = w.unitarity_error();
                    if deviation > OP_TOL {
                        return Err(Error::NotUnitary { deviation });
                    }
                }
            }
        }
        Ok(Self {
            width,
            env_dim,
            entries,
        })
    }

    /// Every label of `width` bits mapped to the identity.
    pub fn identity(width: usize, env_dim: usize) -> Self {
        let entries = (0..1usize << width)
            .map(|l| {
                (
                    format!("{l:0width$b}"),
                    ConditionalOp::Unitary(ComplexMatrix::identity(env_dim)),
                )
            })
            .collect();
        Self {
            width,
            env_dim,
            entries,
        }
    }

    /// Two-qubit interaction from fixed unitaries for labels `00, 01, 10, 11`.
    pub fn from_pair_unitaries(unitaries: [ComplexMatrix; 4]) -> Result<Self> {
        let labels = ["00", "01", "10", "11"];
        Self::new(
            labels
                .iter()
                .zip(unitaries)
                .map(|(l, w)| (l.to_string(), ConditionalOp::Unitary(w)))
                .collect(),
        )
    }

    /// Two-qubit interaction from Hermitian generators for labels `00, 01, 10, 11`.
    pub fn from_pair_generators(generators: [ComplexMatrix; 4]) -> Result<Self> {
        let labels = ["00", "01", "10", "11"];
        Self::new(
            labels
                .iter()
                .zip(generators)
                .map(|(l, v)| (l.to_string(), ConditionalOp::Generator(v)))
                .collect(),
        )
    }

    /// Number of qubits the pointer labels refer to.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    pub fn op(&self, label: &str) -> Option<&ConditionalOp> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, op)| op)
    }

    /// `w_label(duration)`.
    pub fn conditional_unitary(&self, label: &str, duration: f64) -> Result<ComplexMatrix> {
        self.op(label)
            .ok_or_else(|| Error::MissingConditionalOp(label.to_string()))?
            .evolve(duration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_interaction_covers_all_labels() {
        let id = DephasingInteraction::identity(2, 3);
        assert_eq!(id.labels().collect::<Vec<_>>(), vec!["00", "01", "10", "11"]);
        assert_eq!(id.conditional_unitary("10", 7.0).unwrap(), ComplexMatrix::identity(3));
    }

    #[test]
    fn generator_form_is_exponentiated() {
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let inter = DephasingInteraction::new(vec![("0".into(), ConditionalOp::Generator(z))]).unwrap();
        let w = inter.conditional_unitary("0", 0.3).unwrap();
        assert!((w[(0, 0)] - Complex64::from_polar(1.0, -0.3)).norm() < 1e-15);
        assert!(matches!(
            inter.conditional_unitary("1", 0.3),
            Err(Error::MissingConditionalOp(_))
        ));
    }

    #[test]
    fn rejects_invalid_operators() {
        let not_herm = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            DephasingInteraction::new(vec![("0".into(), ConditionalOp::Generator(not_herm.clone()))]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            DephasingInteraction::new(vec![("0".into(), ConditionalOp::Unitary(not_herm))]),
            Err(Error::NotUnitary { .. })
        ));
        let mixed_dims = vec![
            ("0".to_string(), ConditionalOp::Unitary(ComplexMatrix::identity(2))),
            ("1".to_string(), ConditionalOp::Unitary(ComplexMatrix::identity(3))),
        ];
        assert!(matches!(
            DephasingInteraction::new(mixed_dims),
            Err(Error::DimensionMismatch(_))
        ));
        let bad_label = vec![("0a".to_string(), ConditionalOp::Unitary(ComplexMatrix::identity(2)))];
        assert!(DephasingInteraction::new(bad_label).is_err());
        let dup = vec![
            ("01".to_string(), ConditionalOp::Unitary(ComplexMatrix::identity(2))),
            ("01".to_string(), ConditionalOp::Unitary(ComplexMatrix::identity(2))),
        ];
        assert!(DephasingInteraction::new(dup).is_err());
    }
}
