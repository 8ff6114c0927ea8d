use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix. Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&d| Complex64::new(d, 0.0)).collect();
        Self::from_diag(&diag)
    }

    /// Builds a matrix from row-major data of length `dim * dim`.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("rows do not form a square matrix".into()));
        }
        Ok(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Real-valued convenience constructor, mostly for tests and presets.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Outer product |u><v|.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::DimensionMismatch("outer product of unequal vectors".into()));
        }
        let n = u.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        Ok(m)
    }

    /// |v><v| for a state vector `v`.
    pub fn projector(v: &[Complex64]) -> Result<Self> {
        Self::outer(v, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self * other * self^dagger`.
    pub fn conjugate(&self, other: &Self) -> Self {
        &(self * other) * &self.adjoint()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        super::singular_values(self).first().copied().unwrap_or(0.0)
    }

    /// Largest deviation |m_ij - conj(m_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest entry of |U^dagger U - I|.
    pub fn unitarity_error(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    /// Hermitian with no eigenvalue below `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let (values, _) = super::herm_eig_unchecked(&self.hermitian_part());
        values.first().is_none_or(|&v| v >= -tol)
    }

    /// Hermitian, positive semidefinite and unit trace, each within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        let tr = self.trace();
        (tr.re - 1.0).abs() <= tol && tr.im.abs() <= tol && self.is_psd(tol)
    }

    /// (M + M^dagger) / 2, used to strip roundoff before spectral routines.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    /// Purity Tr(M^2) of a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        // Tr(M M) = sum_ij M_ij M_ji = sum_ij |M_ij|^2 for Hermitian M
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Copies the `size`x`size` sub-block starting at (`row`, `col`).
    pub fn sub_block(&self, row: usize, col: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(row + i, col + j)];
            }
        }
        out
    }

    /// Writes `block` into this matrix starting at (`row`, `col`).
    pub fn set_block(&mut self, row: usize, col: usize, block: &Self) {
        let size = block.dim;
        for i in 0..size {
            for j in 0..size {
                self[(row + i, col + j)] = block[(i, j)];
            }
        }
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim, other.dim,
            "matrix dimension mismatch: {} vs {}",
            self.dim, other.dim
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_with_identity() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]]).unwrap();
        let id = ComplexMatrix::identity(2);
        assert_eq!(&m * &id, m);
        assert_eq!(&id * &m, m);
    }

    #[test]
    fn adjoint_and_trace() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 1.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]]).unwrap();
        let a = m.adjoint();
        assert_eq!(a[(0, 1)], c(0.0, 1.0));
        assert_eq!(a[(1, 0)], c(0.5, -1.0));
        assert_eq!(m.trace(), c(4.0, 2.0));
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![]]).is_err());
        assert!(ComplexMatrix::from_vec(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn predicates() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(x.is_hermitian(1e-12));
        assert!(x.is_unitary(1e-12));
        assert!(!x.is_psd(1e-12));

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(half.is_density(1e-12));
        assert!((half.purity() - 0.5).abs() < 1e-15);

        let skew = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(!skew.is_hermitian(1e-12));
        assert!(!skew.is_density(1e-12));
    }

    #[test]
    fn blocks_round_trip() {
        let mut big = ComplexMatrix::zeros(4);
        let small = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        big.set_block(2, 0, &small);
        assert_eq!(big.sub_block(2, 0, 2), small);
        assert_eq!(big.sub_block(0, 0, 2), ComplexMatrix::zeros(2));
    }

    #[test]
    fn op_norm_matches_largest_singular_value() {
        // non-normal, so the Gram route and the one-sided SVD genuinely differ
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(-0.3, 0.2), c(4.0, 0.0)],
            vec![c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.5)],
        ])
        .unwrap();
        let top = super::super::singular_values(&m)[0];
        assert!((m.op_norm() - top).abs() < 1e-13 * top);
        assert_eq!(ComplexMatrix::zeros(3).op_norm(), 0.0);
        let tiny = m.scale_real(1e-17);
        assert!((tiny.op_norm() - 1e-17 * top).abs() < 1e-29);
    }
}
