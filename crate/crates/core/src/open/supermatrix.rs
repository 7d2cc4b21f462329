use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{ensure_square, identity, is_hermitian, ComplexMatrix, I};
use crate::schedules::{eval_generator, eval_generator_derivative, GeneratorSpec, SystemKind};

const HERMITIAN_TOL: f64 = 1e-12;

fn check_operands(h: &ComplexMatrix, gammas: &[ComplexMatrix]) -> Result<usize> {
    let d = ensure_square(h, "Hamiltonian")?;
    for (k, g) in gammas.iter().enumerate() {
        if g.shape() != (d, d) {
            return Err(Error::Shape(format!("Lindblad operator {k} is {:?}, expected {d}x{d}", g.shape())));
        }
    }
    Ok(d)
}

/// `L` acting on row-stacked coherence vectors:
/// `−i(H⊗I − I⊗Hᵀ) + Σ Γ⊗Γ̄ − ½(Γ†Γ)⊗I − ½I⊗(Γ†Γ)ᵀ`.
pub fn build_supermatrix(h: &ComplexMatrix, gammas: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = check_operands(h, gammas)?;
    if !is_hermitian(h, HERMITIAN_TOL) {
        return Err(Error::Input("Hamiltonian is not Hermitian".into()));
    }
    let id = identity(d);
    let mut l = (h.kronecker(&id) - id.kronecker(&h.transpose())) * (-I);
    for g in gammas {
        let gg = g.adjoint() * g;
        l += g.kronecker(&g.conjugate());
        l -= (gg.kronecker(&id) + id.kronecker(&gg.transpose())) * Complex64::new(0.5, 0.0);
    }
    Ok(l)
}

/// Derivative of [`build_supermatrix`] along `(H, Γ_i) + ε(dH, dΓ_i)`.
pub fn supermatrix_derivative(
    h: &ComplexMatrix,
    gammas: &[ComplexMatrix],
    dh: &ComplexMatrix,
    dgammas: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let d = check_operands(h, gammas)?;
    check_operands(dh, dgammas)?;
    if dh.nrows() != d || dgammas.len() != gammas.len() {
        return Err(Error::Shape("derivative operands do not match the generator".into()));
    }
    let id = identity(d);
    let mut l = (dh.kronecker(&id) - id.kronecker(&dh.transpose())) * (-I);
    for (g, dg) in gammas.iter().zip(dgammas) {
        let dgg = dg.adjoint() * g + g.adjoint() * dg;
        l += dg.kronecker(&g.conjugate()) + g.kronecker(&dg.conjugate());
        l -= (dgg.kronecker(&id) + id.kronecker(&dgg.transpose())) * Complex64::new(0.5, 0.0);
    }
    Ok(l)
}

/// `−i[H, ρ] + ½Σ([Γ, ρΓ†] + [Γρ, Γ†])` evaluated on the matrix directly.
pub fn lindblad_rhs(h: &ComplexMatrix, gammas: &[ComplexMatrix], rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = check_operands(h, gammas)?;
    if rho.shape() != (d, d) {
        return Err(Error::Shape(format!("density matrix is {:?}, expected {d}x{d}", rho.shape())));
    }
    let mut out = (h * rho - rho * h) * (-I);
    for g in gammas {
        let gd = g.adjoint();
        let a = rho * &gd;
        let b = g * rho;
        out += ((g * &a - &a * g) + (&b * &gd - &gd * &b)) * Complex64::new(0.5, 0.0);
    }
    Ok(out)
}

fn check_open(spec: &GeneratorSpec) -> Result<()> {
    if spec.kind() == SystemKind::Open {
        Ok(())
    } else {
        Err(Error::Input("expected an open-system generator".into()))
    }
}

/// `L(s)` for an open-kind spec.
pub fn generator_supermatrix(spec: &GeneratorSpec, s: f64) -> Result<ComplexMatrix> {
    check_open(spec)?;
    let g = eval_generator(spec, s)?;
    build_supermatrix(&g.hamiltonian, &g.lindblad)
}

/// `dL/ds` from `dH/ds` and `dΓ_i/ds` by the product rule.
pub fn generator_supermatrix_derivative(spec: &GeneratorSpec, s: f64) -> Result<ComplexMatrix> {
    check_open(spec)?;
    let g = eval_generator(spec, s)?;
    let dg = eval_generator_derivative(spec, s)?;
    supermatrix_derivative(&g.hamiltonian, &g.lindblad, &dg.hamiltonian, &dg.lindblad)
}
