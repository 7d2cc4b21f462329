//! Proper versus frozen-eigenvector adiabatic solutions, and the witnesses
//! that tell them apart.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::closed::{
    adiabatic_condition_ratio, adiabatic_state, berry_phase_curve, dynamical_phase, fidelity, integrate_schrodinger,
    track_spectrum, SpectralTrack,
};
use crate::error::{Error, Result};
use crate::export::num;
use crate::numkit::ComplexVector;
use crate::ode::Tolerances;
use crate::quadrature::{derivative_stencil, grid_index};
use crate::schedules::GeneratorSpec;

fn check_level(track: &SpectralTrack, level: usize) -> Result<()> {
    if level < track.levels() {
        Ok(())
    } else {
        Err(Error::Input(format!("level {level} out of range ({} levels)", track.levels())))
    }
}

/// `e^{−iT∫₀ˢE} |E(0)⟩`: solves `i dψ/dt = E(t)ψ` but is not an
/// instantaneous eigenstate.
pub fn illegal_solution(track: &SpectralTrack, total_time: f64, s: f64, level: usize) -> Result<ComplexVector> {
    check_level(track, level)?;
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::Input(format!("total time must be positive, got {total_time}")));
    }
    let idx = grid_index(track.grid(), s)?;
    let theta = dynamical_phase(track, level, total_time)[idx];
    Ok(track.vector(0, level) * Complex64::from_polar(1.0, -theta))
}

/// `|e^{iβ(s)}⟨E(0)|E(s)⟩ − 1|` with `β` the Berry phase accumulated on `[0, s]`.
pub fn inconsistency_witness(track: &SpectralTrack, s: f64, level: usize) -> Result<f64> {
    check_level(track, level)?;
    let idx = grid_index(track.grid(), s)?;
    let beta = berry_phase_curve(track, level)?;
    Ok(witness_at(track, &beta, idx, level))
}

fn witness_at(track: &SpectralTrack, beta: &[Complex64], idx: usize, level: usize) -> f64 {
    if idx == 0 {
        return 0.0;
    }
    let overlap = track.vector(0, level).dotc(&track.vector(idx, level));
    (Complex64::from_polar(1.0, beta[idx].re) * overlap - 1.0).norm()
}

/// `‖(1 − |E⟩⟨E|) d|E⟩/ds‖` at a grid point.
pub fn projector_residual(track: &SpectralTrack, s: f64, level: usize) -> Result<f64> {
    check_level(track, level)?;
    if track.len() < 3 {
        return Err(Error::Resolution("projector residual needs at least three grid points".into()));
    }
    let angle = track.max_step_angle(level);
    if angle > PI / 4.0 {
        return Err(Error::Resolution(format!(
            "eigenvector of level {level} turns by {angle:.3} rad between grid points"
        )));
    }
    let idx = grid_index(track.grid(), s)?;
    let here = track.vector(idx, level);
    let mut dv = ComplexVector::zeros(here.len());
    for (k, w) in derivative_stencil(track.grid(), idx) {
        dv += track.vector(k, level) * Complex64::new(w, 0.0);
    }
    let tangential = &here * here.dotc(&dv);
    Ok((dv - tangential).norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub total_time: f64,
    pub level: usize,
    pub grid: Vec<f64>,
    pub witness: Vec<f64>,
    pub projector_residual: Vec<f64>,
    pub fid_proper: Vec<f64>,
    pub fid_illegal: Vec<f64>,
    /// Largest adiabatic-condition ratio over the path at this `T`.
    pub condition_ratio: f64,
}

/// Integrates from `|E_level(0)⟩` and compares both candidate solutions with
/// the exact state at every grid point.
pub fn consistency_report(
    spec: &GeneratorSpec,
    total_time: f64,
    grid: &[f64],
    level: usize,
    tol: &Tolerances,
) -> Result<ConsistencyReport> {
    let track = track_spectrum(spec, grid, 1e-10)?;
    check_level(&track, level)?;
    let exact = integrate_schrodinger(spec, total_time, &track.vector(0, level), grid, tol)?;
    let condition_ratio = adiabatic_condition_ratio(&track, spec, total_time)?.max_ratio;
    let mut report = ConsistencyReport {
        total_time,
        level,
        grid: grid.to_vec(),
        witness: Vec::with_capacity(grid.len()),
        projector_residual: Vec::with_capacity(grid.len()),
        fid_proper: Vec::with_capacity(grid.len()),
        fid_illegal: Vec::with_capacity(grid.len()),
        condition_ratio,
    };
    let beta = berry_phase_curve(&track, level)?;
    for (i, &s) in grid.iter().enumerate() {
        report.witness.push(witness_at(&track, &beta, i, level));
        report.projector_residual.push(projector_residual(&track, s, level)?);
        let psi = &exact.states[i];
        let unit = psi.normalize();
        report.fid_proper.push(fidelity(&adiabatic_state(&track, total_time, s, level)?, &unit)?);
        report.fid_illegal.push(fidelity(&illegal_solution(&track, total_time, s, level)?, &unit)?);
    }
    Ok(report)
}

impl ConsistencyReport {
    /// Columns `s,w,r,fid_proper,fid_illegal`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,w,r,fid_proper,fid_illegal\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                num(self.grid[i]),
                num(self.witness[i]),
                num(self.projector_residual[i]),
                num(self.fid_proper[i]),
                num(self.fid_illegal[i])
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::sigma_x;
    use crate::schedules::{make_model, uniform_grid, Term};
    use serde_json::json;

    #[test]
    fn trivial_points() {
        let spec = make_model("rotating_field", &json!({"b": 1.0, "theta": PI / 2.0})).unwrap();
        let track = track_spectrum(&spec, &uniform_grid(65).unwrap(), 1e-10).unwrap();
        assert_eq!(inconsistency_witness(&track, 0.0, 0).unwrap(), 0.0);
        assert_eq!(illegal_solution(&track, 7.0, 0.0, 0).unwrap(), track.vector(0, 0));
        assert!(inconsistency_witness(&track, 0.5, 0).unwrap() >= 0.5);
    }

    #[test]
    fn static_hamiltonian_has_no_inconsistency() {
        let spec = GeneratorSpec::closed(2, vec![Term::constant(sigma_x())]).unwrap();
        let grid = uniform_grid(11).unwrap();
        let track = track_spectrum(&spec, &grid, 1e-10).unwrap();
        for &s in &grid {
            assert!(inconsistency_witness(&track, s, 0).unwrap() < 1e-14);
            assert!(projector_residual(&track, s, 0).unwrap() < 1e-14);
            let a = adiabatic_state(&track, 3.0, s, 0).unwrap();
            let b = illegal_solution(&track, 3.0, s, 0).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn residual_is_gauge_invariant() {
        let spec = make_model("rotating_field", &json!({"b": 1.0, "theta": PI / 3.0})).unwrap();
        let track = track_spectrum(&spec, &uniform_grid(129).unwrap(), 1e-10).unwrap();
        let other = track.rephased(0, 1.234);
        for &s in &[0.0, 0.25, 0.5, 1.0] {
            let a = projector_residual(&track, s, 0).unwrap();
            let b = projector_residual(&other, s, 0).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn csv_layout() {
        let spec = make_model("rotating_field", &json!({"b": 1.0, "theta": PI / 2.0})).unwrap();
        let report = consistency_report(&spec, 5.0, &uniform_grid(33).unwrap(), 0, &Tolerances::default()).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("s,w,r,fid_proper,fid_illegal\n"));
        assert_eq!(csv.lines().count(), 34);
        assert!(report.fid_proper.iter().chain(&report.fid_illegal).all(|f| (0.0..=1.0 + 1e-12).contains(f)));
    }
}
