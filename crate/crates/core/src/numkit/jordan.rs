//! Numerical Jordan canonical form with dual left/right chain bases.
//!
//! The pipeline is: complex Schur form, reordering so that clustered
//! eigenvalues are contiguous, block diagonalization through triangular
//! Sylvester solves, and finally chain construction inside each cluster
//! from the Weyr characteristic of the (nearly) nilpotent part.

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ensure_square, identity, max_abs, svd_right, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanBlock {
    pub eigenvalue: Complex64,
    pub size: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanOptions {
    /// Eigenvalues closer than this (transitively) are merged.
    pub cluster_tol: f64,
    /// Singular values below `rank_tol · max(1, ‖M‖)^k` count as zero in `(M − λ)^k`.
    pub rank_tol: f64,
    /// Largest tolerated condition number of the similarity.
    pub condition_cap: f64,
}

impl Default for JordanOptions {
    fn default() -> Self {
        JordanOptions {
            cluster_tol: 1e-7,
            rank_tol: 1e-9,
            condition_cap: 1e12,
        }
    }
}

/// `S⁻¹ M S = J` with `J = diag(J_1, …, J_m)`.
///
/// Columns of `S` are the right basis `|D_α^(j)⟩⟩`, rows of `S⁻¹` the left
/// basis `⟨⟨E_α^(i)|`, both grouped block by block in the order of `blocks`.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanForm {
    blocks: Vec<JordanBlock>,
    similarity: ComplexMatrix,
    similarity_inverse: ComplexMatrix,
    residual: f64,
    condition: f64,
}

/// Deviations reported by [`verify_jordan_basis`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BasisResiduals {
    /// max |⟨⟨E_α^(i)|D_β^(j)⟩⟩ − δ_αβ δ^ij|
    pub orthonormality: f64,
    /// max |L D_α^(j) − D_α^(j−1) − λ_α D_α^(j)|
    pub right_chain: f64,
    /// max |E_α^(i) L − E_α^(i+1) − λ_α E_α^(i)|
    pub left_chain: f64,
}

impl BasisResiduals {
    pub fn max(&self) -> f64 {
        self.orthonormality.max(self.right_chain).max(self.left_chain)
    }
}

impl JordanForm {
    /// Builds a form from a known block structure and similarity, e.g. an
    /// analytic decomposition supplied by a model. The residual is measured
    /// against `m`.
    pub fn from_parts(
        blocks: Vec<JordanBlock>,
        similarity: ComplexMatrix,
        m: &ComplexMatrix,
    ) -> Result<Self> {
        let n = ensure_square(m, "generator")?;
        if similarity.shape() != (n, n) {
            return Err(Error::Shape(format!(
                "similarity is {:?}, generator is {n}x{n}",
                similarity.shape()
            )));
        }
        if blocks.iter().any(|b| b.size == 0) || blocks.iter().map(|b| b.size).sum::<usize>() != n {
            return Err(Error::Input(format!(
                "block sizes must be positive and sum to {n}"
            )));
        }
        let similarity_inverse = similarity
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Input("similarity is singular".into()))?;
        let mut form = JordanForm {
            blocks,
            similarity,
            similarity_inverse,
            residual: 0.0,
            condition: 0.0,
        };
        form.refresh_diagnostics(m);
        Ok(form)
    }

    pub(crate) fn refresh_diagnostics(&mut self, m: &ComplexMatrix) {
        self.condition = super::condition_number(&self.similarity);
        let j = self.jordan_matrix();
        let similarity_error = max_abs(&(&self.similarity_inverse * m * &self.similarity - j));
        let basis = residuals_of(self, m);
        self.residual = similarity_error.max(basis.max());
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.similarity.nrows()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.blocks.iter().map(|b| b.eigenvalue).collect()
    }

    pub fn similarity(&self) -> &ComplexMatrix {
        &self.similarity
    }

    pub fn similarity_inverse(&self) -> &ComplexMatrix {
        &self.similarity_inverse
    }

    /// Upper bound on every residual reported by [`verify_jordan_basis`]
    /// and on `max|S⁻¹ M S − J|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Column offset of each block inside `S`.
    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let start = *acc;
                *acc += b.size;
                Some(start)
            })
            .collect()
    }

    /// `|D_α^(j)⟩⟩`
    pub fn right(&self, alpha: usize, j: usize) -> ComplexVector {
        assert!(j < self.blocks[alpha].size, "chain index out of range");
        self.similarity.column(self.offsets()[alpha] + j).into_owned()
    }

    /// `⟨⟨E_α^(i)|` as a plain (unconjugated) component vector, so that
    /// `⟨⟨E|v⟩⟩ = left · v`.
    pub fn left(&self, alpha: usize, i: usize) -> ComplexVector {
        assert!(i < self.blocks[alpha].size, "chain index out of range");
        self.similarity_inverse
            .row(self.offsets()[alpha] + i)
            .transpose()
    }

    /// `J = diag(J_1, …, J_m)` with ones on the superdiagonal of each block.
    pub fn jordan_matrix(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut j = ComplexMatrix::zeros(n, n);
        let mut k = 0;
        for b in &self.blocks {
            for q in 0..b.size {
                j[(k + q, k + q)] = b.eigenvalue;
                if q + 1 < b.size {
                    j[(k + q, k + q + 1)] = Complex64::new(1.0, 0.0);
                }
            }
            k += b.size;
        }
        j
    }

    /// Reorders blocks: block `a` of the result is block `order[a]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> JordanForm {
        assert_eq!(order.len(), self.blocks.len());
        let offsets = self.offsets();
        let mut cols = Vec::with_capacity(self.dim());
        for &b in order {
            cols.extend(offsets[b]..offsets[b] + self.blocks[b].size);
        }
        let n = self.dim();
        JordanForm {
            blocks: order.iter().map(|&b| self.blocks[b]).collect(),
            similarity: ComplexMatrix::from_fn(n, n, |i, j| self.similarity[(i, cols[j])]),
            similarity_inverse: ComplexMatrix::from_fn(n, n, |i, j| {
                self.similarity_inverse[(cols[i], j)]
            }),
            residual: self.residual,
            condition: self.condition,
        }
    }

    /// Replaces the columns of `S` belonging to `range` by `S[:, range] · R`
    /// and the matching rows of `S⁻¹` by `R⁻¹ S⁻¹[range, :]`.
    pub(crate) fn transform_columns(
        &mut self,
        start: usize,
        len: usize,
        r: &ComplexMatrix,
        r_inv: &ComplexMatrix,
    ) {
        let cols = self.similarity.columns(start, len) * r;
        self.similarity.columns_mut(start, len).copy_from(&cols);
        let rows = r_inv * self.similarity_inverse.rows(start, len);
        self.similarity_inverse.rows_mut(start, len).copy_from(&rows);
    }
}

/// Numerical Jordan decomposition with the default condition cap.
pub fn jordan_decompose(m: &ComplexMatrix, cluster_tol: f64, rank_tol: f64) -> Result<JordanForm> {
    jordan_decompose_with(
        m,
        &JordanOptions {
            cluster_tol,
            rank_tol,
            ..JordanOptions::default()
        },
    )
}

pub fn jordan_decompose_with(m: &ComplexMatrix, opts: &JordanOptions) -> Result<JordanForm> {
    let n = ensure_square(m, "matrix")?;
    if !(opts.cluster_tol > 0.0) || !(opts.rank_tol > 0.0) || !(opts.condition_cap > 0.0) {
        return Err(Error::Input("Jordan tolerances must be positive".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }

    let (mut q, mut t) = Schur::new(m.clone()).unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = ZERO;
        }
    }

    let diag: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let clusters = cluster_eigenvalues(&diag, opts.cluster_tol);

    // Rank of each diagonal position in the requested cluster order.
    let mut rank_of = vec![0usize; n];
    for (rank, cl) in clusters.iter().enumerate() {
        for &k in &cl.members {
            rank_of[k] = rank;
        }
    }
    reorder_schur(&mut t, &mut q, &mut rank_of);

    let mut ranges = Vec::with_capacity(clusters.len());
    let mut start = 0;
    for cl in &clusters {
        ranges.push((start, cl.members.len()));
        start += cl.members.len();
    }

    let y = block_diagonalize(&mut t, &ranges)?;

    let scale = m.norm().max(1.0);
    let mut local = ComplexMatrix::zeros(n, n);
    let mut blocks = Vec::new();
    for &(start, len) in &ranges {
        let tc = t.view((start, start), (len, len)).into_owned();
        let lambda = tc.trace() / len as f64;
        let nil = &tc - identity(len) * lambda;
        let chains = build_chains(&nil, opts.rank_tol, scale);
        let sizes: Vec<usize> = chains.iter().map(|c| c.len()).collect();
        let mut x = ComplexMatrix::zeros(len, len);
        let mut col = 0;
        for chain in chains {
            for v in chain {
                x.set_column(col, &v);
                col += 1;
            }
        }
        if sizes.iter().any(|&n| n > 1) {
            x = refine_chains(&tc, lambda, &sizes, x);
        }
        for &size in &sizes {
            blocks.push(JordanBlock { eigenvalue: lambda, size });
        }
        local.view_mut((start, start), (len, len)).copy_from(&x);
    }

    let s = &q * y * local;
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Input("similarity transform is singular".into()))?;
    let mut form = JordanForm {
        blocks,
        similarity: s,
        similarity_inverse: s_inv,
        residual: 0.0,
        condition: 0.0,
    };
    form.refresh_diagnostics(m);
    if !(form.condition <= opts.condition_cap) {
        return Err(Error::IllConditioned {
            cond: form.condition,
            cap: opts.condition_cap,
            best_effort: Box::new(form),
        });
    }
    Ok(form)
}

struct Cluster {
    center: Complex64,
    members: Vec<usize>,
}

/// Transitive-closure clustering, sorted by (Re, Im) descending.
fn cluster_eigenvalues(values: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut x = x;
        while parent[x] != r {
            let next = parent[x];
            parent[x] = r;
            x = next;
        }
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            if (values[a] - values[b]).norm() <= tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for k in 0..n {
        let r = find(&mut parent, k);
        if root_index[r] == usize::MAX {
            root_index[r] = clusters.len();
            clusters.push(Cluster {
                center: ZERO,
                members: Vec::new(),
            });
        }
        clusters[root_index[r]].members.push(k);
    }
    for cl in &mut clusters {
        cl.center = cl.members.iter().map(|&k| values[k]).sum::<Complex64>() / cl.members.len() as f64;
    }
    clusters.sort_by(|a, b| descending(a.center, b.center, tol));
    clusters
}

/// Ordering by real part, then imaginary part, both descending; real parts
/// within `tol` count as equal.
pub(crate) fn descending(a: Complex64, b: Complex64, tol: f64) -> std::cmp::Ordering {
    if (a.re - b.re).abs() > tol {
        b.re.total_cmp(&a.re)
    } else {
        b.im.total_cmp(&a.im)
    }
}

/// Givens rotation `G = [[c, s], [−s̄, c]]` with `G·[f, g]ᵀ = [r, 0]ᵀ`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let r = f.norm().hypot(g.norm());
    (f.norm() / r, (f / f.norm()) * g.conj() / r)
}

/// Bubble-sorts the Schur diagonal into nondecreasing `rank` with adjacent
/// unitary swaps, keeping `M = Q T Q†`.
fn reorder_schur(t: &mut ComplexMatrix, q: &mut ComplexMatrix, rank: &mut [usize]) {
    let n = t.nrows();
    if n < 2 {
        return;
    }
    loop {
        let mut swapped = false;
        for k in 0..n - 1 {
            if rank[k] > rank[k + 1] {
                swap_adjacent(t, q, k);
                rank.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
}

fn swap_adjacent(t: &mut ComplexMatrix, q: &mut ComplexMatrix, k: usize) {
    let n = t.nrows();
    let t11 = t[(k, k)];
    let t22 = t[(k + 1, k + 1)];
    let (cs, sn) = givens(t[(k, k + 1)], t22 - t11);
    // rows k, k+1 ← G · rows
    for j in 0..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = x * cs + sn * y;
        t[(k + 1, j)] = y * cs - sn.conj() * x;
    }
    // columns k, k+1 ← columns · Gᴴ
    for m in [&mut *t, &mut *q] {
        for i in 0..n {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * cs + sn.conj() * y;
            m[(i, k + 1)] = y * cs - sn * x;
        }
    }
    t[(k + 1, k)] = ZERO;
    t[(k, k)] = t22;
    t[(k + 1, k + 1)] = t11;
}

/// Removes the coupling between consecutive clusters of the reordered
/// triangular `t`; returns `Y` with `T_old = Y T_new Y⁻¹`.
fn block_diagonalize(t: &mut ComplexMatrix, ranges: &[(usize, usize)]) -> Result<ComplexMatrix> {
    let n = t.nrows();
    let mut y = identity(n);
    for &(start, len) in ranges.iter().take(ranges.len().saturating_sub(1)) {
        let rest = start + len;
        let m = n - rest;
        let t11 = t.view((start, start), (len, len)).into_owned();
        let t22 = t.view((rest, rest), (m, m)).into_owned();
        let rhs = -t.view((start, rest), (len, m)).into_owned();
        let x = triangular_sylvester(&t11, &t22, &rhs)?;
        t.view_mut((start, rest), (len, m)).fill(ZERO);
        // Y ← Y · [[I, X], [0, I]]
        let update = y.view((0, start), (n, len)) * &x;
        let mut target = y.view_mut((0, rest), (n, m));
        target += update;
    }
    Ok(y)
}

/// Solves `A X − X B = C` for upper triangular `A`, `B` with disjoint spectra.
fn triangular_sylvester(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = a.nrows();
    let q = b.nrows();
    let mut x = ComplexMatrix::zeros(p, q);
    for j in 0..q {
        let mut rhs: ComplexVector = c.column(j).into_owned();
        for l in 0..j {
            let coeff = b[(l, j)];
            for i in 0..p {
                rhs[i] += x[(i, l)] * coeff;
            }
        }
        let shift = b[(j, j)];
        for i in (0..p).rev() {
            let mut acc = rhs[i];
            for k in i + 1..p {
                acc -= a[(i, k)] * x[(k, j)];
            }
            let pivot = a[(i, i)] - shift;
            if pivot.norm() == 0.0 {
                return Err(Error::Input("clusters share an eigenvalue".into()));
            }
            x[(i, j)] = acc / pivot;
        }
    }
    Ok(x)
}

/// Jordan chains `[D^(0), …, D^(L−1)]` of a nearly nilpotent `nil`, longest first.
fn build_chains(nil: &ComplexMatrix, rank_tol: f64, scale: f64) -> Vec<Vec<ComplexVector>> {
    let k = nil.nrows();
    // Kernel bases of nil^p, p = 0..=p_max, from singular values.
    let mut kernels: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(k, 0)];
    let mut power = identity(k);
    let mut dims = vec![0usize];
    for p in 1..=k {
        power = &power * nil;
        let thr = rank_tol * scale.powi(p as i32);
        let (sv, v) = svd_right(&power);
        let mut d = sv.iter().filter(|&&x| x <= thr).count();
        d = d.max(*dims.last().unwrap());
        if p == k {
            d = k;
        }
        let basis = v.columns(k - d, d).into_owned();
        kernels.push(basis);
        dims.push(d);
        if d == k {
            break;
        }
    }
    let depth = dims.len() - 1;
    // weyr[p] = number of chains of length ≥ p
    let weyr: Vec<usize> = (0..=depth + 1)
        .map(|p| {
            if p == 0 || p > depth {
                0
            } else {
                dims[p] - dims[p - 1]
            }
        })
        .collect();

    let mut tops: Vec<(ComplexVector, usize)> = Vec::new();
    for p in (1..=depth).rev() {
        let new = weyr[p] - weyr[p + 1];
        if new == 0 {
            continue;
        }
        // Directions already accounted for at level p.
        let mut spanning: Vec<ComplexVector> = kernels[p - 1].column_iter().map(|c| c.into_owned()).collect();
        for (top, len) in &tops {
            let mut w = top.clone();
            for _ in 0..(len - p) {
                w = nil * w;
            }
            spanning.push(w);
        }
        let basis = orthonormal_basis(&spanning);
        let kp = &kernels[p];
        let projected = if basis.ncols() > 0 {
            kp - &basis * (basis.adjoint() * kp)
        } else {
            kp.clone()
        };
        let svd = projected.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        for &col in order.iter().take(new) {
            tops.push((u.column(col).into_owned(), p));
        }
    }

    tops.into_iter()
        .map(|(top, len)| {
            let mut chain = vec![top];
            for _ in 1..len {
                let next = nil * chain.last().unwrap();
                chain.push(next);
            }
            chain.reverse();
            // Balance the chain: geometric mean of the vector norms is one.
            let log_mean = chain.iter().map(|v| v.norm().max(f64::MIN_POSITIVE).ln()).sum::<f64>() / len as f64;
            let factor = (-log_mean).exp();
            chain.into_iter().map(|v| v * Complex64::new(factor, 0.0)).collect()
        })
        .collect()
}

/// `λI + J₀` for the given chain lengths.
fn jordan_matrix_of(lambda: Complex64, sizes: &[usize]) -> ComplexMatrix {
    let n: usize = sizes.iter().sum();
    let mut j = identity(n) * lambda;
    let mut k = 0;
    for &size in sizes {
        for r in 1..size {
            j[(k + r - 1, k + r)] = ONE;
        }
        k += size;
    }
    j
}

/// Projects the chain basis `x` onto the near-null space of
/// `X ↦ AX − XJ`, whose dimension is `Σ min(n_a, n_b)`. Kept only when it
/// lowers the residual without degrading the conditioning.
fn refine_chains(a: &ComplexMatrix, lambda: Complex64, sizes: &[usize], x: ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let j = jordan_matrix_of(lambda, sizes);
    // column-major vec: vec(AX) = (I ⊗ A) vec X, vec(XJ) = (Jᵀ ⊗ I) vec X
    let k = identity(n).kronecker(a) - j.transpose().kronecker(&identity(n));
    let centralizer: usize = sizes.iter().flat_map(|&p| sizes.iter().map(move |&q| p.min(q))).sum();
    let svd = k.svd(false, true);
    let Some(v_t) = svd.v_t else {
        return x;
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[p].total_cmp(&svd.singular_values[q]));
    let vx = ComplexVector::from_column_slice(x.as_slice());
    let mut proj = ComplexVector::zeros(n * n);
    for &r in order.iter().take(centralizer) {
        let basis = v_t.row(r).adjoint();
        proj += &basis * basis.dotc(&vx);
    }
    let y = ComplexMatrix::from_column_slice(n, n, proj.as_slice());
    let residual = |m: &ComplexMatrix| max_abs(&(a * m - m * &j));
    let cond = |m: &ComplexMatrix| super::condition_number(m);
    if residual(&y) < residual(&x) && cond(&y) <= 10.0 * cond(&x) {
        y
    } else {
        x
    }
}

/// Orthonormal basis of the span of `vectors` (modified Gram–Schmidt with
/// rank truncation).
fn orthonormal_basis(vectors: &[ComplexVector]) -> ComplexMatrix {
    let Some(first) = vectors.first() else {
        return ComplexMatrix::zeros(0, 0);
    };
    let n = first.len();
    let mut basis: Vec<ComplexVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let norm = w.norm();
        if norm > 1e-10 * v.norm().max(1e-300) {
            basis.push(w / Complex64::new(norm, 0.0));
        }
    }
    let mut m = ComplexMatrix::zeros(n, basis.len());
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, b);
    }
    m
}

fn residuals_of(jf: &JordanForm, m: &ComplexMatrix) -> BasisResiduals {
    let n = jf.dim();
    let s = &jf.similarity;
    let s_inv = &jf.similarity_inverse;
    let orthonormality = max_abs(&(s_inv * s - identity(n)));

    let ms = m * s;
    let sm = s_inv * m;
    let mut right_chain: f64 = 0.0;
    let mut left_chain: f64 = 0.0;
    let mut k = 0;
    for b in &jf.blocks {
        for j in 0..b.size {
            let col = k + j;
            let mut r = ms.column(col) - s.column(col) * b.eigenvalue;
            if j > 0 {
                r -= s.column(col - 1);
            }
            right_chain = right_chain.max(r.camax());
            let mut l = sm.row(col) - s_inv.row(col) * b.eigenvalue;
            if j + 1 < b.size {
                l -= s_inv.row(col + 1);
            }
            left_chain = left_chain.max(l.camax());
        }
        k += b.size;
    }
    BasisResiduals {
        orthonormality,
        right_chain,
        left_chain,
    }
}

/// Residuals of the duality and chain relations of `jf` against `m`.
pub fn verify_jordan_basis(jf: &JordanForm, m: &ComplexMatrix) -> Result<BasisResiduals> {
    let n = ensure_square(m, "matrix")?;
    if jf.dim() != n {
        return Err(Error::Shape(format!(
            "Jordan form has dimension {}, matrix {n}",
            jf.dim()
        )));
    }
    Ok(residuals_of(jf, m))
}
