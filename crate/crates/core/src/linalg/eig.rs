//! Spectral routines delegated to `nalgebra`.
//!
//! `ComplexMatrix` stays the storage type of the simulator; these functions
//! copy into `nalgebra` matrices, which is negligible at the sizes used here.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ComplexMatrix;

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

/// Eigendecomposition of a matrix assumed Hermitian; the input is
/// symmetrized first, so only its Hermitian part matters. Eigenvalues come
/// in ascending order with eigenvectors as matching columns.
pub(crate) fn herm_eig_unchecked(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.dim();
    let eigen = to_nalgebra(&h.hermitian_part()).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigen.eigenvalues[i].total_cmp(&eigen.eigenvalues[j]));
    let values = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new_col)] = eigen.eigenvectors[(k, old_col)];
        }
    }
    (values, vectors)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.dim() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = to_nalgebra(m).singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Sum of singular values.
pub fn nuclear_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}
