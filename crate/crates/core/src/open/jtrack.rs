use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::supermatrix::generator_supermatrix;
use crate::error::{Error, Result};
use crate::numkit::{
    jordan_decompose_with, verify_jordan_basis, BasisResiduals, ComplexMatrix, JordanForm, JordanOptions,
};
use crate::quadrature::cumulative_trapezoid;
use crate::schedules::{validate_grid, GeneratorSpec, SystemKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanTrackOptions {
    pub jordan: JordanOptions,
    /// Distinct eigenvalue curves closer than this between grid points
    /// count as a collision.
    pub collision_tol: f64,
}

impl Default for JordanTrackOptions {
    fn default() -> Self {
        JordanTrackOptions {
            jordan: JordanOptions::default(),
            collision_tol: 1e-6,
        }
    }
}

/// Jordan decompositions of `L(s)` on a grid with a fixed block order and
/// continuously aligned chain bases.
#[derive(Clone, Debug)]
pub struct JordanTrack {
    grid: Vec<f64>,
    forms: Vec<JordanForm>,
    residuals: Vec<BasisResiduals>,
    /// `eigenvalues[i][α] = λ_α(s_i)`
    eigenvalues: Vec<Vec<Complex64>>,
    /// `lambda_integrals[i][α] = ∫₀^{s_i} λ_α ds′`
    lambda_integrals: Vec<Vec<Complex64>>,
    block_sizes: Vec<usize>,
    /// Block indices sharing one eigenvalue.
    clusters: Vec<Vec<usize>>,
}

/// Maximal runs of consecutive blocks with equal eigenvalue.
fn clusters_of(form: &JordanForm) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (b, block) in form.blocks().iter().enumerate() {
        match out.last_mut() {
            Some(last) if form.blocks()[last[0]].eigenvalue == block.eigenvalue => last.push(b),
            _ => out.push(vec![b]),
        }
    }
    out
}

fn signature(form: &JordanForm, cluster: &[usize]) -> Vec<usize> {
    cluster.iter().map(|&b| form.blocks()[b].size).collect()
}

/// `c₀I + c₁N + …` closest to the upper-triangular Toeplitz part of `m`.
fn toeplitz_projection(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    let mut r = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let c = (0..n - k).map(|q| m[(q, q + k)]).sum::<Complex64>() / (n - k) as f64;
        for q in 0..n - k {
            r[(q, q + k)] = c;
        }
    }
    r
}

fn block_diagonal(parts: &[ComplexMatrix]) -> ComplexMatrix {
    let n = parts.iter().map(|p| p.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut k = 0;
    for p in parts {
        out.view_mut((k, k), p.shape()).copy_from(p);
        k += p.nrows();
    }
    out
}

/// Re-gauges the chains of `form` in `range` to follow `prev`.
fn align_cluster(prev: &JordanForm, form: &mut JordanForm, start: usize, sizes: &[usize], s: f64) -> Result<()> {
    let len: usize = sizes.iter().sum();
    let overlap = form.similarity_inverse().rows(start, len) * prev.similarity().columns(start, len);
    let semisimple = sizes.iter().all(|&n| n == 1);
    let r = if semisimple {
        overlap
    } else {
        let mut parts = Vec::with_capacity(sizes.len());
        let mut k = 0;
        for &n in sizes {
            parts.push(toeplitz_projection(&overlap.view((k, k), (n, n)).into_owned()));
            k += n;
        }
        block_diagonal(&parts)
    };
    let usable = r.iter().all(|z| z.is_finite()) && crate::numkit::condition_number(&r) < 1e8;
    if !usable {
        return Err(Error::Resolution(format!(
            "Jordan bases at s = {s} are nearly orthogonal to the previous point; refine the grid"
        )));
    }
    let (r, r_inv) = if semisimple {
        // unitary polar factor
        let svd = r.svd(true, true);
        let u = svd.u.expect("left singular vectors") * svd.v_t.expect("right singular vectors");
        let u_inv = u.adjoint();
        (u, u_inv)
    } else {
        let inv = r.clone().try_inverse().ok_or_else(|| {
            Error::Resolution(format!("Jordan bases at s = {s} cannot be aligned; refine the grid"))
        })?;
        (r, inv)
    };
    form.transform_columns(start, len, &r, &r_inv);
    Ok(())
}

/// Closest approach to zero of the segment `a → b`, with its parameter.
fn segment_distance(a: Complex64, b: Complex64) -> (f64, f64) {
    let d = b - a;
    let len2 = d.norm_sqr();
    let t = if len2 == 0.0 { 0.0 } else { (-(a.conj() * d).re / len2).clamp(0.0, 1.0) };
    ((a + d * t).norm(), t)
}

fn check_options(opts: &JordanTrackOptions) -> Result<()> {
    if !(opts.collision_tol >= 0.0) {
        return Err(Error::Input("collision tolerance must be nonnegative".into()));
    }
    Ok(())
}

/// Decomposes `L(s)` at every grid point (in parallel) and matches blocks
/// sequentially by predicted eigenvalue.
pub fn jordan_track(spec: &GeneratorSpec, grid: &[f64], opts: &JordanTrackOptions) -> Result<JordanTrack> {
    if spec.kind() != SystemKind::Open {
        return Err(Error::Input("Jordan tracking needs an open-system generator".into()));
    }
    validate_grid(grid)?;
    check_options(opts)?;
    let generators: Vec<ComplexMatrix> = grid
        .iter()
        .map(|&s| generator_supermatrix(spec, s))
        .collect::<Result<_>>()?;
    let forms: Vec<JordanForm> = generators
        .par_iter()
        .map(|l| jordan_decompose_with(l, &opts.jordan))
        .collect::<Result<_>>()?;
    assemble(grid, forms, &generators, opts)
}

impl JordanTrack {
    /// Tracks externally supplied decompositions of `generators`.
    pub fn from_forms(
        grid: &[f64],
        forms: Vec<JordanForm>,
        generators: &[ComplexMatrix],
        opts: &JordanTrackOptions,
    ) -> Result<JordanTrack> {
        validate_grid(grid)?;
        check_options(opts)?;
        if forms.len() != grid.len() || generators.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} forms and {} generators for {} grid points",
                forms.len(),
                generators.len(),
                grid.len()
            )));
        }
        assemble(grid, forms, generators, opts)
    }
}

fn assemble(
    grid: &[f64],
    mut forms: Vec<JordanForm>,
    generators: &[ComplexMatrix],
    opts: &JordanTrackOptions,
) -> Result<JordanTrack> {
    let clusters = clusters_of(&forms[0]);
    let sigs: Vec<Vec<usize>> = clusters.iter().map(|c| signature(&forms[0], c)).collect();
    let centers = |f: &JordanForm, cl: &[Vec<usize>]| -> Vec<Complex64> {
        cl.iter().map(|c| f.blocks()[c[0]].eigenvalue).collect()
    };
    let mut history: Vec<Vec<Complex64>> = vec![centers(&forms[0], &clusters)];

    for i in 1..grid.len() {
        let s = grid[i];
        let new_clusters = clusters_of(&forms[i]);
        let new_sigs: Vec<Vec<usize>> = new_clusters.iter().map(|c| signature(&forms[i], c)).collect();
        let mut a = sigs.clone();
        let mut b = new_sigs.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(Error::Crossing {
                s,
                reason: format!("block signature changes from {sigs:?} to {new_sigs:?}"),
            });
        }

        let prev = &history[i - 1];
        let predicted: Vec<Complex64> = if i >= 2 {
            let w = (grid[i] - grid[i - 1]) / (grid[i - 1] - grid[i - 2]);
            prev.iter().zip(&history[i - 2]).map(|(p, q)| p + (p - q) * w).collect()
        } else {
            prev.clone()
        };
        let new_centers = centers(&forms[i], &new_clusters);
        let mut taken = vec![false; new_clusters.len()];
        let mut target = vec![usize::MAX; clusters.len()];
        for _ in 0..clusters.len() {
            let mut best = (f64::INFINITY, 0, 0);
            for old in (0..clusters.len()).filter(|&o| target[o] == usize::MAX) {
                for new in (0..new_clusters.len()).filter(|&n| !taken[n] && new_sigs[n] == sigs[old]) {
                    let d = (new_centers[new] - predicted[old]).norm();
                    if d < best.0 {
                        best = (d, old, new);
                    }
                }
            }
            target[best.1] = best.2;
            taken[best.2] = true;
        }
        let current: Vec<Complex64> = target.iter().map(|&n| new_centers[n]).collect();

        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (dist, t) = segment_distance(prev[x] - prev[y], current[x] - current[y]);
                if dist <= opts.collision_tol {
                    return Err(Error::Crossing {
                        s: grid[i - 1] + t * (grid[i] - grid[i - 1]),
                        reason: format!("eigenvalue curves {x} and {y} collide"),
                    });
                }
            }
        }

        let order: Vec<usize> = target.iter().flat_map(|&n| new_clusters[n].iter().copied()).collect();
        let mut form = forms[i].permuted(&order);
        let offsets = form.offsets();
        for (c, members) in clusters.iter().enumerate() {
            align_cluster(&forms[i - 1], &mut form, offsets[members[0]], &sigs[c], s)?;
        }
        form.refresh_diagnostics(&generators[i]);
        forms[i] = form;
        history.push(current);
    }

    let residuals = forms
        .iter()
        .zip(generators)
        .map(|(f, l)| verify_jordan_basis(f, l))
        .collect::<Result<Vec<_>>>()?;
    let m = forms[0].blocks().len();
    let eigenvalues: Vec<Vec<Complex64>> = forms.iter().map(|f| f.eigenvalues()).collect();
    let per_block: Vec<Vec<Complex64>> = (0..m)
        .map(|a| cumulative_trapezoid(grid, &eigenvalues.iter().map(|e| e[a]).collect::<Vec<_>>()))
        .collect();
    let lambda_integrals = (0..grid.len()).map(|i| per_block.iter().map(|c| c[i]).collect()).collect();
    Ok(JordanTrack {
        grid: grid.to_vec(),
        block_sizes: forms[0].block_sizes(),
        forms,
        residuals,
        eigenvalues,
        lambda_integrals,
        clusters,
    })
}

impl JordanTrack {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn form(&self, i: usize) -> &JordanForm {
        &self.forms[i]
    }

    pub fn forms(&self) -> &[JordanForm] {
        &self.forms
    }

    pub fn residuals(&self) -> &[BasisResiduals] {
        &self.residuals
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn blocks(&self) -> usize {
        self.block_sizes.len()
    }

    /// `(m, {n_α})`
    pub fn signature(&self) -> (usize, Vec<usize>) {
        (self.blocks(), self.block_sizes.clone())
    }

    /// Column offset of each block inside the similarity.
    pub fn offsets(&self) -> Vec<usize> {
        self.forms[0].offsets()
    }

    pub fn eigenvalue(&self, i: usize, alpha: usize) -> Complex64 {
        self.eigenvalues[i][alpha]
    }

    pub fn eigenvalue_curve(&self, alpha: usize) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|e| e[alpha]).collect()
    }

    pub fn lambda_integral(&self, i: usize, alpha: usize) -> Complex64 {
        self.lambda_integrals[i][alpha]
    }

    /// Whether blocks `α` and `β` carry different eigenvalue curves.
    pub fn distinct(&self, alpha: usize, beta: usize) -> bool {
        !self.clusters.iter().any(|c| c.contains(&alpha) && c.contains(&beta))
    }

    /// `ω_βα(s_i) = λ_β(s_i) − λ_α(s_i)`
    pub fn omega(&self, i: usize, beta: usize, alpha: usize) -> Complex64 {
        self.eigenvalues[i][beta] - self.eigenvalues[i][alpha]
    }

    /// `Ω_βα(s_i) = T ∫₀^{s_i} ω_βα ds′`
    pub fn big_omega(&self, i: usize, beta: usize, alpha: usize, total_time: f64) -> Complex64 {
        (self.lambda_integrals[i][beta] - self.lambda_integrals[i][alpha]) * total_time
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.max()).fold(0.0, f64::max)
    }
}

#[derive(Serialize)]
struct PointView<'a> {
    s: f64,
    eigenvalues: Vec<[f64; 2]>,
    block_sizes: &'a [usize],
    residuals: &'a BasisResiduals,
    condition: f64,
}

impl Serialize for JordanTrack {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let points: Vec<PointView> = (0..self.len())
            .map(|i| PointView {
                s: self.grid[i],
                eigenvalues: self.eigenvalues[i].iter().map(|z| [z.re, z.im]).collect(),
                block_sizes: &self.block_sizes,
                residuals: &self.residuals[i],
                condition: self.forms[i].condition_number(),
            })
            .collect();
        points.serialize(ser)
    }
}
