//! Dense complex linear algebra for the small operators that appear in the
//! simulator: tensor products, partial traces, Hermitian eigendecomposition
//! and the matrix functions and distances built on top of it.
//!
//! Every spectral quantity is routed through one Hermitian eigensolver
//! ([`herm_eig`]); square roots and exponentials are formed from its
//! eigenpairs. Sizes stay below a few hundred, so everything is dense.

mod eig;
mod matrix;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) use eig::herm_eig_unchecked;
pub use eig::{nuclear_norm, singular_values};
pub use matrix::ComplexMatrix;

/// Tolerance for accepting an input as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_CLAMP_TOL, 0)` are clamped to zero; lower ones are an error.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(m * n);
    for i in 0..m {
        for j in 0..m {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    out[(i * n + k, j * n + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut iter = factors.iter();
    let first = (*iter.next().expect("kron_all needs at least one factor")).clone();
    iter.fold(first, |acc, f| kron(&acc, f))
}

/// Reduced operator on the factors listed in `keep` (in their original order).
/// An empty `keep` traces out everything and yields the 1x1 trace.
///
/// `factor_dims` describes the tensor layout of `m`, first factor most
/// significant.
pub fn partial_trace(m: &ComplexMatrix, factor_dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = factor_dims.iter().product();
    if factor_dims.is_empty() || factor_dims.contains(&0) || total != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "factor dims {factor_dims:?} do not multiply to {}",
            m.dim()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&k| k >= factor_dims.len()) {
        return Err(Error::InvalidParameter(format!("invalid kept factors {keep:?}")));
    }

    let traced: Vec<usize> = (0..factor_dims.len()).filter(|f| !keep_sorted.contains(f)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&f| factor_dims[f]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&f| factor_dims[f]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    // strides of each factor in the full index
    let mut strides = vec![1usize; factor_dims.len()];
    for f in (0..factor_dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * factor_dims[f + 1];
    }
    let offset = |factors: &[usize], dims: &[usize], mut flat: usize| -> usize {
        let mut idx = 0;
        for (pos, &f) in factors.iter().enumerate().rev() {
            idx += (flat % dims[pos]) * strides[f];
            flat /= dims[pos];
        }
        idx
    };

    let kept_offsets: Vec<usize> = (0..kept_total).map(|r| offset(&keep_sorted, &kept_dims, r)).collect();
    let traced_offsets: Vec<usize> = (0..traced_total).map(|r| offset(&traced, &traced_dims, r)).collect();

    let mut out = ComplexMatrix::zeros(kept_total);
    for (i, &ki) in kept_offsets.iter().enumerate() {
        for (j, &kj) in kept_offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &t in &traced_offsets {
                acc += m[(ki + t, kj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    let deviation = h.hermiticity_error();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigenvalues (ascending) and unitary eigenvector matrix of a Hermitian matrix.
pub fn herm_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_hermitian(h)?;
    Ok(herm_eig_unchecked(&h.hermitian_part()))
}

/// `V diag(f(λ)) V^dagger` from an eigendecomposition.
fn spectral_function(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
    let n = vectors.dim();
    let mapped: Vec<Complex64> = values.iter().map(|&v| f(v)).collect();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += vectors[(i, k)] * mapped[k] * vectors[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `exp(-i v t / hbar)` for Hermitian `v`.
pub fn expm_unitary(v: &ComplexMatrix, t: f64, hbar: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = herm_eig(v)?;
    Ok(spectral_function(&values, &vectors, |lambda| {
        Complex64::from_polar(1.0, -lambda * t / hbar)
    }))
}

/// Principal square root of a positive semidefinite matrix.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = herm_eig(m)?;
    if let Some(&min) = values.first() {
        if min < -PSD_CLAMP_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(spectral_function(&values, &vectors, |lambda| {
        Complex64::new(lambda.max(0.0).sqrt(), 0.0)
    }))
}

/// Uhlmann fidelity `[Tr sqrt(sqrt(r1) r2 sqrt(r1))]^2`.
///
/// Evaluated as the squared trace norm of `sqrt(r1) sqrt(r2)`, which is the
/// same quantity but stays accurate for rank-deficient inputs. Subnormalized
/// inputs are accepted; the value is clamped to `[0, 1]`.
pub fn uhlmann_fidelity(r1: &ComplexMatrix, r2: &ComplexMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between {}x{0} and {}x{1}",
            r1.dim(),
            r2.dim()
        )));
    }
    let s1 = sqrt_psd(r1)?;
    let s2 = sqrt_psd(r2)?;
    let root_fidelity = nuclear_norm(&(&s1 * &s2));
    Ok((root_fidelity * root_fidelity).clamp(0.0, 1.0))
}

/// `½ Σ |eigenvalues(r1 - r2)|` for Hermitian inputs.
pub fn trace_distance(r1: &ComplexMatrix, r2: &ComplexMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between {}x{0} and {}x{1}",
            r1.dim(),
            r2.dim()
        )));
    }
    let (values, _) = herm_eig(&(r1 - r2))?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}
