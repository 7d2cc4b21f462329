use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{eigh, ComplexMatrix, ComplexVector};
use crate::schedules::{validate_grid, GeneratorSpec, SystemKind};

/// Instantaneous eigenpairs of `H(s)` on a grid, continuous in order and phase.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralTrack {
    grid: Vec<f64>,
    /// `energies[i][n] = E_n(s_i)`
    energies: Vec<Vec<f64>>,
    /// Column `n` of `vectors[i]` is `|n(s_i)⟩`.
    #[serde(skip)]
    vectors: Vec<ComplexMatrix>,
    min_gap: f64,
}

/// Eigen-decomposition at each grid point, matched to the previous point by
/// maximal overlap and rephased so consecutive overlaps are real positive.
pub fn track_spectrum(spec: &GeneratorSpec, grid: &[f64], gap_floor: f64) -> Result<SpectralTrack> {
    if spec.kind() != SystemKind::Closed {
        return Err(Error::Input("spectral tracking needs a closed-system generator".into()));
    }
    if !(gap_floor >= 0.0) {
        return Err(Error::Input("gap floor must be nonnegative".into()));
    }
    validate_grid(grid)?;
    let d = spec.dim();
    let mut energies = Vec::with_capacity(grid.len());
    let mut vectors: Vec<ComplexMatrix> = Vec::with_capacity(grid.len());
    let mut min_gap = f64::INFINITY;

    for &s in grid {
        let (e, v) = eigh(&spec.hamiltonian(s)?);
        for k in 0..d.saturating_sub(1) {
            let gap = e[k + 1] - e[k];
            if gap <= gap_floor {
                return Err(Error::Degenerate {
                    s,
                    pair: (k, k + 1),
                    gap,
                });
            }
            min_gap = min_gap.min(gap);
        }
        let (e, v) = match vectors.last() {
            None => (e, initial_gauge(v)),
            Some(prev) => {
                let (e, v, permuted) = align(prev, e, v);
                if permuted {
                    return Err(Error::Resolution(format!(
                        "maximal-overlap matching reorders nondegenerate levels before s = {s}; refine the grid"
                    )));
                }
                (e, v)
            }
        };
        energies.push(e);
        vectors.push(v);
    }
    Ok(SpectralTrack {
        grid: grid.to_vec(),
        energies,
        vectors,
        min_gap: if d < 2 { f64::INFINITY } else { min_gap },
    })
}

fn initial_gauge(v: ComplexMatrix) -> ComplexMatrix {
    let refs = reference_components(&v);
    fix_gauge(v, &refs)
}

/// Row of the largest-modulus component of each column (first on ties).
pub(crate) fn reference_components(v: &ComplexMatrix) -> Vec<usize> {
    v.column_iter()
        .map(|col| {
            let (mut best, mut idx) = (-1.0, 0);
            for (i, z) in col.iter().enumerate() {
                if z.norm() > best + 1e-12 {
                    best = z.norm();
                    idx = i;
                }
            }
            idx
        })
        .collect()
}

/// Rephases each column so that its reference component is real positive.
pub(crate) fn fix_gauge(mut v: ComplexMatrix, refs: &[usize]) -> ComplexMatrix {
    for (mut col, &r) in v.column_iter_mut().zip(refs) {
        let z = col[r];
        if z.norm() > 0.0 {
            col *= z.conj() / z.norm();
            col[r] = Complex64::new(col[r].norm(), 0.0);
        }
    }
    v
}

fn align(prev: &ComplexMatrix, e: Vec<f64>, v: ComplexMatrix) -> (Vec<f64>, ComplexMatrix, bool) {
    let d = e.len();
    let overlaps = prev.adjoint() * &v;
    let mut assigned_new = vec![false; d];
    let mut target_of = vec![usize::MAX; d];
    for _ in 0..d {
        let mut best = (-1.0, 0, 0);
        for old in 0..d {
            if target_of[old] != usize::MAX {
                continue;
            }
            for new in 0..d {
                if !assigned_new[new] && overlaps[(old, new)].norm() > best.0 {
                    best = (overlaps[(old, new)].norm(), old, new);
                }
            }
        }
        target_of[best.1] = best.2;
        assigned_new[best.2] = true;
    }
    let mut out = ComplexMatrix::zeros(d, d);
    let mut energies = vec![0.0; d];
    for old in 0..d {
        let new = target_of[old];
        let o = overlaps[(old, new)];
        let phase = if o.norm() > 0.0 { o.conj() / o.norm() } else { Complex64::new(1.0, 0.0) };
        out.set_column(old, &(v.column(new) * phase));
        energies[old] = e[new];
    }
    let permuted = target_of.iter().enumerate().any(|(old, &new)| old != new);
    (energies, out, permuted)
}

impl SpectralTrack {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn levels(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn energy(&self, i: usize, n: usize) -> f64 {
        self.energies[i][n]
    }

    /// `E_n(s)` along the grid.
    pub fn energies(&self, n: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[n]).collect()
    }

    pub fn energies_at(&self, i: usize) -> &[f64] {
        &self.energies[i]
    }

    /// `|n(s_i)⟩`
    pub fn vector(&self, i: usize, n: usize) -> ComplexVector {
        self.vectors[i].column(n).into_owned()
    }

    /// Eigenvectors at `s_i` as columns.
    pub fn basis(&self, i: usize) -> &ComplexMatrix {
        &self.vectors[i]
    }

    /// `g_nk(s_i) = E_n(s_i) − E_k(s_i)`
    pub fn gap(&self, i: usize, n: usize, k: usize) -> f64 {
        self.energies[i][n] - self.energies[i][k]
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// The same track with `|n(s)⟩ → e^{iφ}|n(s)⟩` at every point.
    pub fn rephased(&self, level: usize, phase: f64) -> SpectralTrack {
        let mut out = self.clone();
        let w = Complex64::from_polar(1.0, phase);
        for v in &mut out.vectors {
            let col = v.column(level) * w;
            v.set_column(level, &col);
        }
        out
    }

    /// `⟨n|dn/ds⟩` at every grid point from second-order differences, projected
    /// onto the imaginary axis.
    pub fn connection(&self, n: usize) -> Vec<Complex64> {
        self.raw_connection(n).into_iter().map(|z| Complex64::new(0.0, z.im)).collect()
    }

    /// Unprojected difference estimate; the real part is discretization error.
    pub fn raw_connection(&self, n: usize) -> Vec<Complex64> {
        (0..self.len())
            .map(|i| {
                let here = self.vectors[i].column(n);
                crate::quadrature::derivative_stencil(&self.grid, i)
                    .iter()
                    .map(|&(k, w)| here.dotc(&self.vectors[k].column(n)) * w)
                    .sum()
            })
            .collect()
    }

    /// Largest angle `acos|⟨n(s_i)|n(s_{i+1})⟩|` over the track for level `n`.
    pub fn max_step_angle(&self, n: usize) -> f64 {
        self.vectors
            .windows(2)
            .map(|w| w[0].column(n).dotc(&w[1].column(n)).norm().min(1.0).acos())
            .fold(0.0, f64::max)
    }
}
