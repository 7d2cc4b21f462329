use num_complex::Complex64;
use serde::Serialize;

use super::supermatrix::generator_supermatrix;
use crate::error::{Error, Result};
use crate::numkit::{devectorize_slice, eigh, ensure_square, max_abs, vectorize, ComplexMatrix};
use crate::ode::{integrate, Tolerances};
use crate::schedules::{validate_grid, GeneratorSpec, SystemKind};
use crate::trajectory::Trajectory;

const DENSITY_TOL: f64 = 1e-10;

/// Checks Hermiticity, unit trace and positivity to 1e-10.
pub fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    ensure_square(rho, "density matrix")?;
    let herm = max_abs(&(rho - rho.adjoint()));
    if herm > DENSITY_TOL {
        return Err(Error::Input(format!("density matrix is not Hermitian (deviation {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::Input(format!("density matrix trace is {tr}, expected 1")));
    }
    let sym = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let min = eigh(&sym).0[0];
    if min < -DENSITY_TOL {
        return Err(Error::Input(format!("density matrix has negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Solves `d|ρ⟩⟩/ds = T L(s)|ρ⟩⟩`. Trace, Hermiticity and positivity are
/// monitored by [`density_diagnostics`], never enforced.
pub fn integrate_master(
    spec: &GeneratorSpec,
    total_time: f64,
    rho0: &ComplexMatrix,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory> {
    if spec.kind() != SystemKind::Open {
        return Err(Error::Input("master equation needs an open-system generator".into()));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::Input(format!("total time must be positive, got {total_time}")));
    }
    validate_grid(grid)?;
    if rho0.shape() != (spec.dim(), spec.dim()) {
        return Err(Error::Shape(format!("initial state is {:?}, expected {d}x{d}", rho0.shape(), d = spec.dim())));
    }
    validate_density(rho0)?;
    let factor = Complex64::new(total_time, 0.0);
    let v0 = vectorize(rho0)?.into_inner();
    let (states, stats) = integrate(
        |s, v| Ok(generator_supermatrix(spec, s.clamp(0.0, 1.0))? * v * factor),
        grid,
        &v0,
        tol,
    )?;
    Ok(Trajectory {
        kind: SystemKind::Open,
        total_time,
        grid: grid.to_vec(),
        times: grid.iter().map(|s| s * total_time).collect(),
        states,
        tolerances: *tol,
        stats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityDiagnostics {
    /// `max |Tr ρ − 1|`
    pub trace_drift: f64,
    /// Smallest eigenvalue of the Hermitian part over all samples.
    pub min_eigenvalue: f64,
    /// `max |ρ − ρ†|`
    pub hermiticity: f64,
}

pub fn density_diagnostics(traj: &Trajectory) -> Result<DensityDiagnostics> {
    let n = traj.states.first().map_or(0, |v| v.len());
    let d = (n as f64).sqrt().round() as usize;
    let mut out = DensityDiagnostics {
        trace_drift: 0.0,
        min_eigenvalue: f64::INFINITY,
        hermiticity: 0.0,
    };
    for v in &traj.states {
        let rho = devectorize_slice(v, d)?;
        out.trace_drift = out.trace_drift.max((rho.trace() - Complex64::new(1.0, 0.0)).norm());
        out.hermiticity = out.hermiticity.max(max_abs(&(&rho - rho.adjoint())));
        let sym = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        out.min_eigenvalue = out.min_eigenvalue.min(eigh(&sym).0[0]);
    }
    Ok(out)
}
