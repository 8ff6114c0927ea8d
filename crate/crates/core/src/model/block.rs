//! System ⊗ environment states stored as a grid of environment operators.
//!
//! A [`BlockState`] over a register of `n` named qubits keeps only the
//! computational-basis labels that carry weight. The assembled operator is
//! `Σ_{L,L'} |L><L'| ⊗ block(L, L')`, with labels read as bit strings whose
//! first character is the first register qubit.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default threshold below which a label's row and column count as empty.
pub const LABEL_CUTOFF: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct BlockState {
    register: Vec<String>,
    env_dim: usize,
    labels: Vec<usize>,
    blocks: Vec<ComplexMatrix>,
}

impl BlockState {
    /// `labels` must be strictly ascending; `blocks` is the row-major
    /// `labels × labels` grid.
    pub fn new(register: Vec<String>, env_dim: usize, labels: Vec<usize>, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if register.is_empty() {
            return Err(Error::InvalidParameter("empty qubit register".into()));
        }
        for (i, name) in register.iter().enumerate() {
            if register[..i].contains(name) {
                return Err(Error::InvalidParameter(format!("qubit `{name}` appears twice")));
            }
        }
        if env_dim == 0 {
            return Err(Error::InvalidParameter("environment dimension must be positive".into()));
        }
        let space = 1usize << register.len();
        if labels.windows(2).any(|w| w[0] >= w[1]) || labels.iter().any(|&l| l >= space) {
            return Err(Error::InvalidParameter(format!(
                "labels {labels:?} are not ascending basis indices"
            )));
        }
        if blocks.len() != labels.len() * labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for {} labels",
                blocks.len(),
                labels.len()
            )));
        }
        if let Some(bad) = blocks.iter().find(|b| b.dim() != env_dim) {
            return Err(Error::DimensionMismatch(format!(
                "block is {0}x{0}, environment dimension is {env_dim}",
                bad.dim()
            )));
        }
        Ok(Self {
            register,
            env_dim,
            labels,
            blocks,
        })
    }

    /// Builds a state from `(row label, column label) -> block` entries given
    /// as bit strings; absent pairs are zero blocks.
    pub fn from_label_map(register: &[&str], env_dim: usize, entries: &[(&str, &str, ComplexMatrix)]) -> Result<Self> {
        let width = register.len();
        let parse = |s: &str| -> Result<usize> {
            if s.len() != width || !s.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::InvalidLabel(s.to_string()));
            }
            Ok(usize::from_str_radix(s, 2).expect("validated bit string"))
        };
        let mut grid: BTreeMap<(usize, usize), ComplexMatrix> = BTreeMap::new();
        let mut labels: Vec<usize> = Vec::new();
        for (row, col, block) in entries {
            let (r, c) = (parse(row)?, parse(col)?);
            labels.push(r);
            labels.push(c);
            grid.insert((r, c), block.clone());
        }
        labels.sort_unstable();
        labels.dedup();
        let blocks = labels
            .iter()
            .flat_map(|&r| labels.iter().map(move |&c| (r, c)))
            .map(|key| grid.remove(&key).unwrap_or_else(|| ComplexMatrix::zeros(env_dim)))
            .collect();
        Self::new(
            register.iter().map(|s| s.to_string()).collect(),
            env_dim,
            labels,
            blocks,
        )
    }

    pub fn register(&self) -> &[String] {
        &self.register
    }

    pub fn num_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Retained basis indices, ascending.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_string(&self, label: usize) -> String {
        format!("{label:0width$b}", width = self.num_qubits())
    }

    pub fn label_strings(&self) -> Vec<String> {
        self.labels.iter().map(|&l| self.label_string(l)).collect()
    }

    /// Block at positions (`i`, `j`) of the retained label list.
    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i * self.labels.len() + j]
    }

    /// Block for a pair of bit-string labels; `None` if either is not retained.
    pub fn block_for(&self, row: &str, col: &str) -> Option<&ComplexMatrix> {
        let find = |s: &str| {
            usize::from_str_radix(s, 2)
                .ok()
                .filter(|_| s.len() == self.num_qubits())
                .and_then(|l| self.labels.iter().position(|&x| x == l))
        };
        Some(self.block(find(row)?, find(col)?))
    }

    pub fn qubit_index(&self, name: &str) -> Result<usize> {
        self.register
            .iter()
            .position(|q| q == name)
            .ok_or_else(|| Error::UnknownQubit(name.to_string()))
    }

    fn qubit_indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let idx = names.iter().map(|n| self.qubit_index(n)).collect::<Result<Vec<_>>>()?;
        for (i, q) in idx.iter().enumerate() {
            if idx[..i].contains(q) {
                return Err(Error::InvalidParameter(format!("qubit `{}` listed twice", names[i])));
            }
        }
        Ok(idx)
    }

    fn bit_position(&self, qubit: usize) -> usize {
        self.num_qubits() - 1 - qubit
    }

    /// Bits of `label` on `qubits`, first qubit most significant.
    fn sub_label(&self, label: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((label >> self.bit_position(q)) & 1))
    }

    fn with_sub_label(&self, label: usize, qubits: &[usize], value: usize) -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(label, |acc, (i, &q)| {
            let pos = self.bit_position(q);
            let bit = (value >> (k - 1 - i)) & 1;
            (acc & !(1 << pos)) | (bit << pos)
        })
    }

    /// Sum of the diagonal block traces.
    pub fn trace(&self) -> Complex64 {
        (0..self.labels.len()).map(|i| self.block(i, i).trace()).sum()
    }

    /// Divides every block by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.scale_real(factor)).collect(),
            ..self.clone()
        }
    }

    /// Assembles the full `2^n d_E` operator.
    pub fn to_full(&self) -> ComplexMatrix {
        let d = self.env_dim;
        let mut full = ComplexMatrix::zeros((1 << self.num_qubits()) * d);
        for (i, &li) in self.labels.iter().enumerate() {
            for (j, &lj) in self.labels.iter().enumerate() {
                full.set_block(li * d, lj * d, self.block(i, j));
            }
        }
        full
    }

    /// Splits a full operator into blocks, keeping every label whose row or
    /// column has an entry above `cutoff`.
    pub fn from_full(m: &ComplexMatrix, register: &[&str], env_dim: usize, cutoff: f64) -> Result<Self> {
        let space = Self::check_full_dims(m, register, env_dim)?;
        let labels: Vec<usize> = (0..space)
            .filter(|&l| Self::label_weight(m, l, space, env_dim) > cutoff)
            .collect();
        Self::collect_blocks(m, register, env_dim, labels)
    }

    /// Like [`from_full`](Self::from_full) but with a prescribed label set;
    /// weight above `cutoff` anywhere else is an error.
    pub fn from_full_on(
        m: &ComplexMatrix,
        register: &[&str],
        env_dim: usize,
        labels: &[usize],
        cutoff: f64,
    ) -> Result<Self> {
        let space = Self::check_full_dims(m, register, env_dim)?;
        let width = register.len();
        let offending: Vec<String> = (0..space)
            .filter(|l| !labels.contains(l))
            .filter(|&l| Self::label_weight(m, l, space, env_dim) > cutoff)
            .map(|l| format!("{l:0width$b}"))
            .collect();
        if !offending.is_empty() {
            return Err(Error::UnexpectedSupport(offending));
        }
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        Self::collect_blocks(m, register, env_dim, labels)
    }

    fn check_full_dims(m: &ComplexMatrix, register: &[&str], env_dim: usize) -> Result<usize> {
        let space = 1usize << register.len();
        if env_dim == 0 || m.dim() != space * env_dim {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} matrix cannot hold {1} qubits and a {env_dim}-dimensional environment",
                m.dim(),
                register.len()
            )));
        }
        Ok(space)
    }

    fn label_weight(m: &ComplexMatrix, label: usize, space: usize, d: usize) -> f64 {
        (0..space)
            .map(|other| {
                m.sub_block(label * d, other * d, d)
                    .max_abs()
                    .max(m.sub_block(other * d, label * d, d).max_abs())
            })
            .fold(0.0, f64::max)
    }

    fn collect_blocks(m: &ComplexMatrix, register: &[&str], env_dim: usize, labels: Vec<usize>) -> Result<Self> {
        let blocks = labels
            .iter()
            .flat_map(|&r| labels.iter().map(move |&c| (r, c)))
            .map(|(r, c)| m.sub_block(r * env_dim, c * env_dim, env_dim))
            .collect();
        Self::new(
            register.iter().map(|s| s.to_string()).collect(),
            env_dim,
            labels,
            blocks,
        )
    }

    /// Traces out every qubit not named in `keep`; the environment is kept.
    /// The reduced register follows the order given in `keep`.
    pub fn reduce(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::InvalidParameter("reduction must keep at least one qubit".into()));
        }
        let kept = self.qubit_indices(keep)?;
        let traced: Vec<usize> = (0..self.num_qubits()).filter(|q| !kept.contains(q)).collect();

        let mut grid: BTreeMap<(usize, usize), ComplexMatrix> = BTreeMap::new();
        for (i, &li) in self.labels.iter().enumerate() {
            for (j, &lj) in self.labels.iter().enumerate() {
                if self.sub_label(li, &traced) != self.sub_label(lj, &traced) {
                    continue;
                }
                let key = (self.sub_label(li, &kept), self.sub_label(lj, &kept));
                let block = self.block(i, j);
                grid.entry(key)
                    .and_modify(|acc| *acc = &*acc + block)
                    .or_insert_with(|| block.clone());
            }
        }
        self.assemble(keep.iter().map(|s| s.to_string()).collect(), grid)
    }

    fn assemble(&self, register: Vec<String>, mut grid: BTreeMap<(usize, usize), ComplexMatrix>) -> Result<Self> {
        let mut labels: Vec<usize> = grid.keys().flat_map(|&(r, c)| [r, c]).collect();
        labels.sort_unstable();
        labels.dedup();
        let d = self.env_dim;
        let blocks = labels
            .iter()
            .flat_map(|&r| labels.iter().map(move |&c| (r, c)))
            .map(|key| grid.remove(&key).unwrap_or_else(|| ComplexMatrix::zeros(d)))
            .collect();
        Self::new(register, d, labels, blocks)
    }

    /// `(O ⊗ I) ρ (O ⊗ I)^dagger` for an operator `O` on the named qubits
    /// (first name = most significant index of `O`). The retained label set
    /// is the structural image of the old one under `O`.
    pub fn transform(&self, op: &ComplexMatrix, qubits: &[&str]) -> Result<Self> {
        let targets = self.qubit_indices(qubits)?;
        if op.dim() != 1 << targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} operator on {1} qubits",
                op.dim(),
                targets.len()
            )));
        }
        // O|L> = Σ_m O[m, sub(L)] |L with sub = m>
        let images: Vec<Vec<(usize, Complex64)>> = self
            .labels
            .iter()
            .map(|&l| {
                let sub = self.sub_label(l, &targets);
                (0..op.dim())
                    .filter_map(|m| {
                        let coeff = op[(m, sub)];
                        (coeff.norm() != 0.0).then(|| (self.with_sub_label(l, &targets, m), coeff))
                    })
                    .collect()
            })
            .collect();

        let mut grid: BTreeMap<(usize, usize), ComplexMatrix> = BTreeMap::new();
        for (i, row_image) in images.iter().enumerate() {
            for (j, col_image) in images.iter().enumerate() {
                let block = self.block(i, j);
                for &(r, a) in row_image {
                    for &(c, b) in col_image {
                        let term = block.scale(a * b.conj());
                        grid.entry((r, c))
                            .and_modify(|acc| *acc = &*acc + &term)
                            .or_insert(term);
                    }
                }
            }
        }
        self.assemble(self.register.clone(), grid)
    }

    /// `block(L, L') -> w(L) block(L, L') w(L')^dagger`, where `w` gives the
    /// environment unitary for the sub-label of `L` on the named qubits.
    pub fn conjugate_conditional<F>(&self, qubits: &[&str], mut unitary_for: F) -> Result<Self>
    where
        F: FnMut(usize) -> Result<ComplexMatrix>,
    {
        let targets = self.qubit_indices(qubits)?;
        let mut cache: BTreeMap<usize, ComplexMatrix> = BTreeMap::new();
        let mut per_label = Vec::with_capacity(self.labels.len());
        for &l in &self.labels {
            let sub = self.sub_label(l, &targets);
            if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(sub) {
                let w = unitary_for(sub)?;
                if w.dim() != self.env_dim {
                    return Err(Error::DimensionMismatch(format!(
                        "conditional operator is {0}x{0}, environment dimension is {1}",
                        w.dim(),
                        self.env_dim
                    )));
                }
                slot.insert(w);
            }
            per_label.push(sub);
        }
        let adjoints: BTreeMap<usize, ComplexMatrix> = cache.iter().map(|(&k, w)| (k, w.adjoint())).collect();
        let n = self.labels.len();
        let blocks = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| &(&cache[&per_label[i]] * self.block(i, j)) * &adjoints[&per_label[j]])
            .collect();
        Ok(Self { blocks, ..self.clone() })
    }

    /// [`check_structure`](Self::check_structure) plus, for unit-trace
    /// states, positivity of the assembled matrix.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        self.check_structure(tol)?;
        let trace = self.trace();
        if (trace.re - 1.0).abs() <= tol && !self.to_full().is_density(tol.max(1e-9)) {
            return Err(Error::InvalidStructure(
                "assembled state is not a density matrix".into(),
            ));
        }
        Ok(())
    }

    /// Checks block Hermiticity (`block_ji = block_ij^dagger`) and PSD
    /// diagonal blocks. Cheap enough to run after every transformation.
    pub fn check_structure(&self, tol: f64) -> Result<()> {
        let n = self.labels.len();
        for i in 0..n {
            for j in i..n {
                let deviation = (self.block(j, i) - &self.block(i, j).adjoint()).max_abs();
                if deviation > tol {
                    return Err(Error::InvalidStructure(format!(
                        "blocks ({}, {}) are not adjoint to each other (deviation {deviation:.3e})",
                        self.label_string(self.labels[i]),
                        self.label_string(self.labels[j])
                    )));
                }
            }
            if !self.block(i, i).is_psd(tol) {
                return Err(Error::InvalidStructure(format!(
                    "diagonal block {} is not positive semidefinite",
                    self.label_string(self.labels[i])
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Debug for BlockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockState")
            .field("register", &self.register)
            .field("env_dim", &self.env_dim)
            .field("labels", &self.label_strings())
            .finish_non_exhaustive()
    }
}
