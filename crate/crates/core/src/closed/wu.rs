use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::dynamics::integrate_schrodinger;
use super::estimate::derivative_matrix_elements;
use super::track::{track_spectrum, SpectralTrack};
use crate::error::{Error, Result};
use crate::numkit::{serde_matrix, ComplexMatrix};
use crate::ode::Tolerances;
use crate::quadrature::cumulative_trapezoid;
use crate::schedules::GeneratorSpec;

pub const MAX_ORDER: usize = 3;
const GAP_FLOOR: f64 = 1e-10;

/// Propagator series in the number of level transitions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WuExpansion {
    pub order: usize,
    pub total_time: f64,
    pub grid: Vec<f64>,
    /// `K(s)` samples.
    #[serde(with = "serde_matrix::list")]
    pub k: Vec<ComplexMatrix>,
    #[serde(with = "serde_matrix::list")]
    pub diagonal: Vec<ComplexMatrix>,
    #[serde(with = "serde_matrix::list")]
    pub off_diagonal: Vec<ComplexMatrix>,
    /// `terms[n][i] = U⁽ⁿ⁾(s_i)`
    #[serde(skip)]
    pub terms: Vec<Vec<ComplexMatrix>>,
    /// `Σ_{n ≤ order} U⁽ⁿ⁾(s_i)`
    #[serde(with = "serde_matrix::list")]
    pub cumulative: Vec<ComplexMatrix>,
}

impl WuExpansion {
    /// `Σ_{n ≤ up_to} U⁽ⁿ⁾` at grid index `i`.
    pub fn partial_sum(&self, up_to: usize, i: usize) -> ComplexMatrix {
        self.terms[..=up_to.min(self.order)]
            .iter()
            .fold(ComplexMatrix::zeros(self.k[i].nrows(), self.k[i].ncols()), |acc, t| acc + &t[i])
    }
}

/// `Φ_mn(s_i) = ∫₀^{s_i} (E_m − E_n)` by trapezoid.
fn gap_integrals(track: &SpectralTrack) -> Vec<Vec<f64>> {
    let d = track.levels();
    let cum: Vec<Vec<f64>> = (0..d)
        .map(|n| cumulative_trapezoid(track.grid(), &track.energies(n)))
        .collect();
    (0..track.len())
        .map(|i| (0..d * d).map(|mn| cum[mn / d][i] - cum[mn % d][i]).collect())
        .collect()
}

/// `C_mn = ⟨m|dn/ds⟩`: off-diagonal entries from `⟨m|dH/ds|n⟩/(E_n − E_m)`,
/// diagonal entries from differences of the tracked vectors.
fn connection_matrices(track: &SpectralTrack, spec: &GeneratorSpec) -> Result<Vec<ComplexMatrix>> {
    let d = track.levels();
    let elements = derivative_matrix_elements(track, spec)?;
    let diag: Vec<Vec<Complex64>> = (0..d).map(|n| track.connection(n)).collect();
    Ok(elements
        .iter()
        .enumerate()
        .map(|(i, m)| {
            ComplexMatrix::from_fn(d, d, |a, b| {
                if a == b {
                    diag[a][i]
                } else {
                    m[(a, b)] / (track.energy(i, b) - track.energy(i, a))
                }
            })
        })
        .collect())
}

pub fn wu_expansion(spec: &GeneratorSpec, total_time: f64, order: usize, grid: &[f64]) -> Result<WuExpansion> {
    if order > MAX_ORDER {
        return Err(Error::Input(format!("order {order} exceeds the supported maximum {MAX_ORDER}")));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::Input(format!("total time must be positive, got {total_time}")));
    }
    let track = track_spectrum(spec, grid, GAP_FLOOR)?;
    wu_expansion_on_track(&track, spec, total_time, order)
}

pub fn wu_expansion_on_track(
    track: &SpectralTrack,
    spec: &GeneratorSpec,
    total_time: f64,
    order: usize,
) -> Result<WuExpansion> {
    if order > MAX_ORDER {
        return Err(Error::Input(format!("order {order} exceeds the supported maximum {MAX_ORDER}")));
    }
    let grid = track.grid();
    let d = track.levels();
    for i in 0..grid.len() - 1 {
        let spread = |j: usize| {
            let e = track.energies_at(j);
            e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        let phase = total_time * spread(i).max(spread(i + 1)) * (grid[i + 1] - grid[i]);
        if phase > PI / 4.0 {
            return Err(Error::Resolution(format!(
                "oscillation phase {phase:.3} rad between s = {} and s = {} exceeds π/4",
                grid[i],
                grid[i + 1]
            )));
        }
    }

    let phi = gap_integrals(track);
    let conn = connection_matrices(track, spec)?;
    let k: Vec<ComplexMatrix> = conn
        .iter()
        .zip(&phi)
        .map(|(c, p)| {
            ComplexMatrix::from_fn(d, d, |m, n| -c[(m, n)] * Complex64::from_polar(1.0, total_time * p[m * d + n]))
        })
        .collect();
    let diagonal: Vec<ComplexMatrix> = k.iter().map(|m| ComplexMatrix::from_diagonal(&m.diagonal())).collect();
    let off_diagonal: Vec<ComplexMatrix> = k.iter().zip(&diagonal).map(|(a, b)| a - b).collect();

    // U⁽⁰⁾ = diag(exp ∫ D_nn)
    let log_u0: Vec<Vec<Complex64>> = (0..d)
        .map(|n| {
            let dn: Vec<Complex64> = diagonal.iter().map(|m| m[(n, n)]).collect();
            cumulative_trapezoid(grid, &dn)
        })
        .collect();
    let u0: Vec<ComplexMatrix> = (0..grid.len())
        .map(|i| ComplexMatrix::from_fn(d, d, |a, b| if a == b { log_u0[a][i].exp() } else { Complex64::new(0.0, 0.0) }))
        .collect();
    let u0_inv: Vec<ComplexMatrix> = (0..grid.len())
        .map(|i| ComplexMatrix::from_fn(d, d, |a, b| if a == b { (-log_u0[a][i]).exp() } else { Complex64::new(0.0, 0.0) }))
        .collect();

    let mut terms = vec![u0.clone()];
    for _ in 1..=order {
        let prev = terms.last().unwrap();
        let integrand: Vec<ComplexMatrix> = (0..grid.len())
            .map(|i| &u0_inv[i] * &off_diagonal[i] * &prev[i])
            .collect();
        let integral = cumulative_matrix_trapezoid(grid, &integrand);
        terms.push(u0.iter().zip(integral).map(|(u, x)| u * x).collect());
    }
    let cumulative = (0..grid.len())
        .map(|i| terms.iter().fold(ComplexMatrix::zeros(d, d), |acc, t| acc + &t[i]))
        .collect();
    Ok(WuExpansion {
        order,
        total_time,
        grid: grid.to_vec(),
        k,
        diagonal,
        off_diagonal,
        terms,
        cumulative,
    })
}

fn cumulative_matrix_trapezoid(grid: &[f64], values: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let (r, c) = values[0].shape();
    let mut acc = ComplexMatrix::zeros(r, c);
    let mut out = Vec::with_capacity(values.len());
    out.push(acc.clone());
    for i in 1..values.len() {
        let h = Complex64::new(0.5 * (grid[i] - grid[i - 1]), 0.0);
        acc += (&values[i - 1] + &values[i]) * h;
        out.push(acc.clone());
    }
    out
}

/// Exact propagator in the frame of the series: `U_mn(s) = e^{iθ_m(s)}⟨m(s)|ψ_n(s)⟩`
/// where `ψ_n` starts in `|n(0)⟩` and `θ_m = T∫E_m`.
pub fn exact_interaction_propagator(
    track: &SpectralTrack,
    spec: &GeneratorSpec,
    total_time: f64,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let d = track.levels();
    let grid = track.grid();
    let theta: Vec<Vec<f64>> = (0..d)
        .map(|n| cumulative_trapezoid(grid, &track.energies(n)).into_iter().map(|x| x * total_time).collect())
        .collect();
    let columns: Vec<_> = (0..d)
        .map(|n| integrate_schrodinger(spec, total_time, &track.vector(0, n), grid, tol))
        .collect::<Result<_>>()?;
    Ok((0..grid.len())
        .map(|i| {
            ComplexMatrix::from_fn(d, d, |m, n| {
                Complex64::from_polar(1.0, theta[m][i]) * track.basis(i).column(m).dotc(&columns[n].states[i])
            })
        })
        .collect())
}
