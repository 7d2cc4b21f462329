use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::jtrack::JordanTrack;
use crate::error::{Error, Result};
use crate::numkit::ComplexVector;
use crate::schedules::SystemKind;
use crate::trajectory::Trajectory;

const EXP_LIMIT: f64 = 700.0;

/// `p_β^(j)(s)` in `|ρ⟩⟩ = ½ Σ p_β^(j) e^{T∫λ_β} |D_β^(j)⟩⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanCoefficients {
    total_time: f64,
    grid: Vec<f64>,
    block_sizes: Vec<usize>,
    offsets: Vec<usize>,
    /// `values[i][offset_β + j]`
    values: Vec<Vec<Complex64>>,
}

fn offsets_of(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect()
}

fn grids_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// `p_β^(j)(s) = 2 e^{−T∫₀ˢλ_β} ⟨⟨E_β^(j)(s)|ρ(s)⟩⟩`
pub fn expand_jordan_coefficients(traj: &Trajectory, track: &JordanTrack, total_time: f64) -> Result<JordanCoefficients> {
    if traj.kind != SystemKind::Open {
        return Err(Error::Input("coefficients need a coherence-vector trajectory".into()));
    }
    if !grids_match(&traj.grid, track.grid()) {
        return Err(Error::Shape("trajectory and Jordan track use different grids".into()));
    }
    if (traj.total_time - total_time).abs() > 1e-12 * total_time.abs().max(1.0) {
        return Err(Error::Input(format!(
            "trajectory was integrated for T = {}, not {total_time}",
            traj.total_time
        )));
    }
    let sizes = track.block_sizes().to_vec();
    let offsets = offsets_of(&sizes);
    let mut values = Vec::with_capacity(track.len());
    for (i, rho) in traj.states.iter().enumerate() {
        let form = track.form(i);
        if rho.len() != form.dim() {
            return Err(Error::Shape(format!("state has {} components, generator {}", rho.len(), form.dim())));
        }
        let proj = form.similarity_inverse() * rho;
        let mut row = vec![Complex64::new(0.0, 0.0); form.dim()];
        for (beta, (&n, &off)) in sizes.iter().zip(&offsets).enumerate() {
            let exponent = -track.lambda_integral(i, beta) * total_time;
            if exponent.re > EXP_LIMIT {
                return Err(Error::Overflow(format!(
                    "e^(-T∫λ) for block {beta} exceeds e^{EXP_LIMIT} at s = {}",
                    traj.grid[i]
                )));
            }
            let w = exponent.exp() * 2.0;
            for j in 0..n {
                row[off + j] = w * proj[off + j];
            }
        }
        values.push(row);
    }
    Ok(JordanCoefficients {
        total_time,
        grid: traj.grid.clone(),
        block_sizes: sizes,
        offsets,
        values,
    })
}

impl JordanCoefficients {
    /// Coefficients given directly; `values[i]` lists every `(β, j)` block by block.
    pub fn from_values(
        total_time: f64,
        grid: Vec<f64>,
        block_sizes: Vec<usize>,
        values: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        let n: usize = block_sizes.iter().sum();
        if values.len() != grid.len() || values.iter().any(|v| v.len() != n) {
            return Err(Error::Shape(format!("coefficients must be {} rows of {n}", grid.len())));
        }
        Ok(JordanCoefficients {
            total_time,
            offsets: offsets_of(&block_sizes),
            grid,
            block_sizes,
            values,
        })
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn get(&self, i: usize, beta: usize, j: usize) -> Complex64 {
        self.values[i][self.offsets[beta] + j]
    }

    pub fn curve(&self, beta: usize, j: usize) -> Vec<Complex64> {
        self.values.iter().map(|v| v[self.offsets[beta] + j]).collect()
    }

    /// `½ Σ p_β^(j) e^{T∫λ_β} |D_β^(j)⟩⟩` at grid index `i`.
    pub fn reconstruct(&self, track: &JordanTrack, i: usize) -> Result<ComplexVector> {
        if !grids_match(&self.grid, track.grid()) || self.block_sizes != track.block_sizes() {
            return Err(Error::Shape("coefficients do not belong to this track".into()));
        }
        let form = track.form(i);
        let mut weights = ComplexVector::zeros(form.dim());
        for (beta, (&n, &off)) in self.block_sizes.iter().zip(&self.offsets).enumerate() {
            let w = (track.lambda_integral(i, beta) * self.total_time).exp() * 0.5;
            for j in 0..n {
                weights[off + j] = self.values[i][off + j] * w;
            }
        }
        Ok(form.similarity() * weights)
    }

    /// `max_i ‖reconstruct(i) − ρ(s_i)‖∞`
    pub fn reconstruction_error(&self, track: &JordanTrack, traj: &Trajectory) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, rho) in traj.states.iter().enumerate() {
            worst = worst.max((self.reconstruct(track, i)? - rho).camax());
        }
        Ok(worst)
    }
}

impl Serialize for JordanCoefficients {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct View<'a> {
            total_time: f64,
            grid: &'a [f64],
            block_sizes: &'a [usize],
            values: Vec<Vec<[f64; 2]>>,
        }
        View {
            total_time: self.total_time,
            grid: &self.grid,
            block_sizes: &self.block_sizes,
            values: self.values.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
        }
        .serialize(ser)
    }
}
