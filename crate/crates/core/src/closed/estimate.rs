use serde::Serialize;

use super::track::SpectralTrack;
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, ComplexVector};
use crate::schedules::{eval_generator_derivative, GeneratorSpec};

/// `⟨k(s)|dH/ds|n(s)⟩` at every grid point of the track.
pub fn derivative_matrix_elements(track: &SpectralTrack, spec: &GeneratorSpec) -> Result<Vec<ComplexMatrix>> {
    if spec.dim() != track.levels() {
        return Err(Error::Shape(format!(
            "track has {} levels, generator dimension {}",
            track.levels(),
            spec.dim()
        )));
    }
    track
        .grid()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let dh = eval_generator_derivative(spec, s)?.hamiltonian;
            let v = track.basis(i);
            Ok(v.adjoint() * dh * v)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairRatio {
    pub n: usize,
    pub k: usize,
    /// `max_s |⟨k|Ḣ|n⟩ / g_nk|` with `Ḣ = (1/T) dH/ds`
    pub max_rate: f64,
    /// `min_s |g_nk|`
    pub min_gap: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRatios {
    pub total_time: f64,
    pub pairs: Vec<PairRatio>,
    pub max_ratio: f64,
}

/// Per-pair ratio of the largest transition rate to the smallest gap, with
/// the maximum and minimum taken independently over the whole path.
pub fn adiabatic_condition_ratio(track: &SpectralTrack, spec: &GeneratorSpec, total_time: f64) -> Result<ConditionRatios> {
    if !(total_time > 0.0) {
        return Err(Error::Input(format!("total time must be positive, got {total_time}")));
    }
    let elements = derivative_matrix_elements(track, spec)?;
    let d = track.levels();
    let mut pairs = Vec::new();
    for n in 0..d {
        for k in n + 1..d {
            let mut max_rate: f64 = 0.0;
            let mut min_gap = f64::INFINITY;
            for (i, m) in elements.iter().enumerate() {
                let g = track.gap(i, n, k).abs();
                max_rate = max_rate.max(m[(k, n)].norm() / (total_time * g));
                min_gap = min_gap.min(g);
            }
            pairs.push(PairRatio {
                n,
                k,
                max_rate,
                min_gap,
                ratio: max_rate / min_gap,
            });
        }
    }
    let max_ratio = pairs.iter().map(|p| p.ratio).fold(0.0, f64::max);
    Ok(ConditionRatios {
        total_time,
        pairs,
        max_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelEstimate {
    /// Initially populated level.
    pub n: usize,
    pub k: usize,
    /// `|a_n(0)| max_s |⟨k|dH/ds|n⟩|`
    pub f: f64,
    /// `min_s |g_nk|`
    pub g: f64,
    pub t: f64,
    /// `|a_n(0)| |⟨k|dH/ds|n⟩| / g_nk²` on the grid.
    pub integrand: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedTimeEstimate {
    pub f: f64,
    pub g: f64,
    pub t_est: f64,
    pub levels: Vec<LevelEstimate>,
}

/// `T_est = max_k F_k / G_k²` for evolution starting in level `m`.
pub fn min_time_estimate(track: &SpectralTrack, spec: &GeneratorSpec, m: usize) -> Result<ClosedTimeEstimate> {
    let d = track.levels();
    if m >= d {
        return Err(Error::Input(format!("level {m} out of range ({d} levels)")));
    }
    let mut a = ComplexVector::zeros(d);
    a[m] = crate::numkit::ONE;
    min_time_estimate_weighted(track, spec, &a)
}

/// Generalization to a superposition `Σ a_n(0)|n(0)⟩`: every pair with
/// `a_n(0) ≠ 0` contributes `|a_n(0)| F_nk / G_nk²`.
pub fn min_time_estimate_weighted(
    track: &SpectralTrack,
    spec: &GeneratorSpec,
    amplitudes: &ComplexVector,
) -> Result<ClosedTimeEstimate> {
    let d = track.levels();
    if amplitudes.len() != d {
        return Err(Error::Shape(format!("{} amplitudes for {d} levels", amplitudes.len())));
    }
    let elements = derivative_matrix_elements(track, spec)?;
    let mut levels = Vec::new();
    for n in 0..d {
        let w = amplitudes[n].norm();
        if w == 0.0 {
            continue;
        }
        for k in 0..d {
            if k == n {
                continue;
            }
            let mut f: f64 = 0.0;
            let mut g = f64::INFINITY;
            let mut integrand = Vec::with_capacity(elements.len());
            for (i, el) in elements.iter().enumerate() {
                let x = w * el[(k, n)].norm();
                let gap = track.gap(i, n, k).abs();
                f = f.max(x);
                g = g.min(gap);
                integrand.push(x / (gap * gap));
            }
            levels.push(LevelEstimate {
                n,
                k,
                f,
                g,
                t: f / (g * g),
                integrand,
            });
        }
    }
    let (f, g, t_est) = levels
        .iter()
        .max_by(|a, b| a.t.total_cmp(&b.t))
        .map(|w| (w.f, w.g, w.t))
        .ok_or_else(|| Error::Input("estimate needs at least two levels and a nonzero amplitude".into()))?;
    Ok(ClosedTimeEstimate { f, g, t_est, levels })
}
