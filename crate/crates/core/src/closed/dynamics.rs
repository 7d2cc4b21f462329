use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::track::{fix_gauge, reference_components, SpectralTrack};
use crate::error::{Error, Result};
use crate::numkit::{eigh, serde_matrix, ComplexMatrix, ComplexVector, I};
use crate::ode::{integrate, IntegratorStats, Tolerances};
use crate::quadrature::{cumulative_trapezoid, grid_index};
use crate::schedules::{eval_generator_derivative, validate_grid, GeneratorSpec, SystemKind};
use crate::trajectory::Trajectory;

const NORM_TOL: f64 = 1e-8;

fn check_closed(spec: &GeneratorSpec) -> Result<()> {
    if spec.kind() == SystemKind::Closed {
        Ok(())
    } else {
        Err(Error::Input("expected a closed-system generator".into()))
    }
}

fn check_total_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("total time must be positive, got {t}")))
    }
}

/// Solves `dψ/ds = −iT H(s) ψ` with adaptive Runge–Kutta. The norm is not
/// renormalized; [`Trajectory::norm_drift`] reports it.
pub fn integrate_schrodinger(
    spec: &GeneratorSpec,
    total_time: f64,
    psi0: &ComplexVector,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<Trajectory> {
    check_closed(spec)?;
    check_total_time(total_time)?;
    validate_grid(grid)?;
    if psi0.len() != spec.dim() {
        return Err(Error::Shape(format!("initial state has {} components, expected {}", psi0.len(), spec.dim())));
    }
    if (psi0.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::Input(format!("initial state norm {} is not 1", psi0.norm())));
    }
    let factor = -I * total_time;
    let (states, stats) = integrate(
        |s, psi| Ok(spec.hamiltonian(s.clamp(0.0, 1.0))? * psi * factor),
        grid,
        psi0,
        tol,
    )?;
    Ok(Trajectory {
        kind: SystemKind::Closed,
        total_time,
        grid: grid.to_vec(),
        times: grid.iter().map(|s| s * total_time).collect(),
        states,
        tolerances: *tol,
        stats,
    })
}

/// `|⟨a|b⟩|²` for unit vectors.
pub fn fidelity(a: &ComplexVector, b: &ComplexVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("states have {} and {} components", a.len(), b.len())));
    }
    for v in [a, b] {
        if (v.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Input(format!("state norm {} deviates from 1", v.norm())));
        }
    }
    Ok(a.dotc(b).norm_sqr().clamp(0.0, 1.0))
}

/// Berry phase of one level together with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BerryPhase {
    /// `γ_n(s_end)`; for closed loops reduced to `(−2π, 0]`.
    pub phase: f64,
    /// `∫ Re⟨n|dn/ds⟩`, zero for exactly normalized vectors.
    pub imaginary_residue: f64,
    /// `arg⟨n(0)|n(s_end)⟩` when the path returns to its starting ray.
    pub closure: Option<f64>,
}

/// Running `i∫⟨n|dn/ds⟩` on the track grid (trapezoid, central differences).
pub fn berry_phase_curve(track: &SpectralTrack, n: usize) -> Result<Vec<Complex64>> {
    check_level(track, n)?;
    let angle = track.max_step_angle(n);
    if angle > PI / 4.0 {
        return Err(Error::Resolution(format!(
            "eigenvector of level {n} turns by {angle:.3} rad between grid points"
        )));
    }
    let a: Vec<Complex64> = track.raw_connection(n).into_iter().map(|z| I * z).collect();
    Ok(cumulative_trapezoid(track.grid(), &a))
}

pub fn berry_phase(track: &SpectralTrack, n: usize, s_end: f64) -> Result<BerryPhase> {
    let idx = grid_index(track.grid(), s_end)?;
    let curve = berry_phase_curve(track, n)?;
    let raw = curve[idx];
    let overlap = track.vector(0, n).dotc(&track.vector(idx, n));
    let closure = (idx > 0 && overlap.norm() >= 1.0 - 1e-9).then(|| overlap.arg());
    let phase = match closure {
        Some(chi) => wrap_nonpositive(raw.re + chi),
        None => raw.re,
    };
    Ok(BerryPhase {
        phase,
        imaginary_residue: raw.im,
        closure,
    })
}

fn wrap_nonpositive(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    x - two_pi * (x / two_pi).ceil()
}

fn check_level(track: &SpectralTrack, n: usize) -> Result<()> {
    if n < track.levels() {
        Ok(())
    } else {
        Err(Error::Input(format!("level {n} out of range ({} levels)", track.levels())))
    }
}

/// `T∫₀ˢ E_n ds′` on the track grid.
pub fn dynamical_phase(track: &SpectralTrack, n: usize, total_time: f64) -> Vec<f64> {
    cumulative_trapezoid(track.grid(), &track.energies(n))
        .into_iter()
        .map(|x| x * total_time)
        .collect()
}

/// `e^{−iT∫E_{n0}} e^{iγ_{n0}(s)} |n0(s)⟩` at a grid point `s`.
pub fn adiabatic_state(track: &SpectralTrack, total_time: f64, s: f64, n0: usize) -> Result<ComplexVector> {
    check_total_time(total_time)?;
    check_level(track, n0)?;
    let idx = grid_index(track.grid(), s)?;
    let gamma = berry_phase_curve(track, n0)?[idx].re;
    let theta = dynamical_phase(track, n0, total_time)[idx];
    Ok(track.vector(idx, n0) * Complex64::from_polar(1.0, gamma - theta))
}

/// Coefficients `a_k(s)` of `ψ = Σ a_n e^{−iT∫E_n}|n(s)⟩` and the
/// reconstructed states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientTrajectory {
    pub total_time: f64,
    pub grid: Vec<f64>,
    #[serde(serialize_with = "serialize_vectors")]
    pub coefficients: Vec<ComplexVector>,
    /// `θ_n(s) = T∫₀ˢE_n`
    pub dynamical_phases: Vec<Vec<f64>>,
    #[serde(serialize_with = "serialize_vectors")]
    pub states: Vec<ComplexVector>,
    pub stats: IntegratorStats,
}

fn serialize_vectors<S: serde::Serializer>(vs: &[ComplexVector], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(vs.len()))?;
    for v in vs {
        seq.serialize_element(&serde_matrix::vector::to_pairs(v))?;
    }
    seq.end()
}

/// Eigenbasis of `H(s)` in the smooth gauge that keeps a fixed reference
/// component of every eigenvector real positive.
struct GaugedBasis<'a> {
    spec: &'a GeneratorSpec,
    refs: Vec<usize>,
}

const FD_STEP: f64 = 1e-5;

impl GaugedBasis<'_> {
    fn at(&self, s: f64) -> Result<(Vec<f64>, ComplexMatrix)> {
        let (e, v) = eigh(&self.spec.hamiltonian(s.clamp(0.0, 1.0))?);
        for (n, &r) in self.refs.iter().enumerate() {
            if v[(r, n)].norm() < 1e-8 {
                return Err(Error::Resolution(format!(
                    "gauge reference component of level {n} vanishes at s = {s}"
                )));
            }
        }
        Ok((e, fix_gauge(v, &self.refs)))
    }

    /// `⟨k|dk/ds⟩` for every level.
    fn diagonal_connection(&self, s: f64, here: &ComplexMatrix) -> Result<Vec<Complex64>> {
        let h = FD_STEP;
        let (nodes, weights): ([f64; 3], [f64; 3]) = if s - h < 0.0 {
            ([s, s + h, s + 2.0 * h], [-1.5 / h, 2.0 / h, -0.5 / h])
        } else if s + h > 1.0 {
            ([s, s - h, s - 2.0 * h], [1.5 / h, -2.0 / h, 0.5 / h])
        } else {
            ([s - h, s, s + h], [-0.5 / h, 0.0, 0.5 / h])
        };
        let mut out = vec![Complex64::new(0.0, 0.0); here.ncols()];
        for (&x, &w) in nodes.iter().zip(&weights) {
            if w == 0.0 {
                continue;
            }
            let (_, v) = self.at(x)?;
            for (n, o) in out.iter_mut().enumerate() {
                *o += here.column(n).dotc(&v.column(n)) * w;
            }
        }
        Ok(out)
    }
}

/// Integrates the coefficient equations in the instantaneous eigenbasis,
/// with couplings `⟨k|dH/ds|n⟩/(E_n − E_k)` between distinct levels.
pub fn coefficient_dynamics(
    spec: &GeneratorSpec,
    total_time: f64,
    a0: &ComplexVector,
    grid: &[f64],
    tol: &Tolerances,
) -> Result<CoefficientTrajectory> {
    check_closed(spec)?;
    check_total_time(total_time)?;
    validate_grid(grid)?;
    let d = spec.dim();
    if a0.len() != d {
        return Err(Error::Shape(format!("{} coefficients for dimension {d}", a0.len())));
    }
    if (a0.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::Input(format!("coefficients have norm {}", a0.norm())));
    }
    let (_, v0) = eigh(&spec.hamiltonian(0.0)?);
    let basis = GaugedBasis {
        spec,
        refs: reference_components(&v0),
    };

    let rhs = |s: f64, y: &ComplexVector| -> Result<ComplexVector> {
        let s = s.clamp(0.0, 1.0);
        let (e, v) = basis.at(s)?;
        for k in 0..d.saturating_sub(1) {
            if e[k + 1] - e[k] <= 1e-12 {
                return Err(Error::Degenerate { s, pair: (k, k + 1), gap: e[k + 1] - e[k] });
            }
        }
        let dh = eval_generator_derivative(spec, s)?.hamiltonian;
        let m = v.adjoint() * dh * &v;
        let diag = basis.diagonal_connection(s, &v)?;
        let mut dy = ComplexVector::zeros(2 * d);
        for k in 0..d {
            let mut acc = -y[k] * diag[k];
            for n in 0..d {
                if n == k {
                    continue;
                }
                let coupling = m[(k, n)] / (e[n] - e[k]);
                let phase = Complex64::from_polar(1.0, -(y[d + n].re - y[d + k].re));
                acc -= y[n] * coupling * phase;
            }
            dy[k] = acc;
            dy[d + k] = Complex64::new(total_time * e[k], 0.0);
        }
        Ok(dy)
    };

    let mut y0 = ComplexVector::zeros(2 * d);
    y0.rows_mut(0, d).copy_from(a0);
    let (ys, stats) = integrate(rhs, grid, &y0, tol)?;

    let mut coefficients = Vec::with_capacity(ys.len());
    let mut phases = Vec::with_capacity(ys.len());
    let mut states = Vec::with_capacity(ys.len());
    for (y, &s) in ys.iter().zip(grid) {
        let a = y.rows(0, d).into_owned();
        let theta: Vec<f64> = (0..d).map(|n| y[d + n].re).collect();
        let (_, v) = basis.at(s)?;
        let weights = ComplexVector::from_fn(d, |n, _| a[n] * Complex64::from_polar(1.0, -theta[n]));
        states.push(v * weights);
        coefficients.push(a);
        phases.push(theta);
    }
    Ok(CoefficientTrajectory {
        total_time,
        grid: grid.to_vec(),
        coefficients,
        dynamical_phases: phases,
        states,
        stats,
    })
}
