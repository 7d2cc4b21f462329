//! Dense complex linear algebra used throughout the crate.
//!
//! Operators are stored as `nalgebra` dynamic matrices of `Complex64`.
//! Density matrices are mapped to coherence vectors by row stacking, so
//! that `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`.

mod expm;
mod jordan;
pub mod serde_matrix;

pub use expm::expm;
pub use jordan::{
    jordan_decompose, jordan_decompose_with, verify_jordan_basis, BasisResiduals, JordanBlock,
    JordanForm, JordanOptions,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Passes iff `max|M − M†| ≤ tol`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

pub(crate) fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Shape(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Hilbert–Schmidt inner product `Tr(u† v) / norm_factor`.
pub fn hs_inner(u: &ComplexMatrix, v: &ComplexMatrix, norm_factor: f64) -> Result<Complex64> {
    let d = ensure_square(u, "left operand")?;
    if v.shape() != (d, d) {
        return Err(Error::Shape(format!(
            "operands differ in shape: {:?} vs {:?}",
            u.shape(),
            v.shape()
        )));
    }
    if !(norm_factor > 0.0) {
        return Err(Error::Input(format!(
            "normalization factor must be positive, got {norm_factor}"
        )));
    }
    // Tr(u† v) = Σ_ij conj(u_ij) v_ij
    let tr = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>();
    Ok(tr / norm_factor)
}

/// Row-stacked vectorization of a square operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVector(ComplexVector);

impl CoherenceVector {
    pub fn new(components: ComplexVector) -> Self {
        CoherenceVector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.0
    }

    pub fn into_inner(self) -> ComplexVector {
        self.0
    }
}

impl From<ComplexVector> for CoherenceVector {
    fn from(v: ComplexVector) -> Self {
        CoherenceVector(v)
    }
}

/// Component `i·D + j` (zero based) holds `ρ_ij`.
pub fn vectorize(rho: &ComplexMatrix) -> Result<CoherenceVector> {
    let d = ensure_square(rho, "density matrix")?;
    Ok(CoherenceVector(ComplexVector::from_fn(d * d, |k, _| {
        rho[(k / d, k % d)]
    })))
}

pub fn devectorize(v: &CoherenceVector, d: usize) -> Result<ComplexMatrix> {
    devectorize_slice(v.as_vector(), d)
}

pub(crate) fn devectorize_slice(v: &ComplexVector, d: usize) -> Result<ComplexMatrix> {
    if d == 0 || v.len() != d * d {
        return Err(Error::Shape(format!(
            "coherence vector of length {} is not {d}² long",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| v[i * d + j]))
}

/// Hermitian eigen-decomposition with eigenvalues sorted ascending.
pub fn eigh(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let d = h.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `⟨a|b⟩` with the bra conjugated.
pub fn braket(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.dotc(b)
}

/// Singular values sorted descending together with the matching right
/// singular vectors (as columns).
pub(crate) fn svd_right(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    // Rows of Vᴴ are the conjugated right singular vectors.
    let v = ComplexMatrix::from_fn(n, order.len(), |i, j| vt[(order[j], i)].conj());
    (values, v)
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
