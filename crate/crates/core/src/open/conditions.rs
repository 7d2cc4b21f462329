use num_complex::Complex64;
use serde::Serialize;

use super::coefficients::JordanCoefficients;
use super::counts::{condition_term_count, time_term_count, tuple_multiplicity};
use super::jtrack::JordanTrack;
use super::supermatrix::generator_supermatrix_derivative;
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;
use crate::quadrature::derivative_stencil;
use crate::schedules::GeneratorSpec;

const OMEGA_FLOOR: f64 = 1e-10;
const EXP_LIMIT: f64 = 700.0;

/// `dL/ds` at every grid point of the track.
pub fn generator_derivatives(track: &JordanTrack, spec: &GeneratorSpec) -> Result<Vec<ComplexMatrix>> {
    track.grid().iter().map(|&s| generator_supermatrix_derivative(spec, s)).collect()
}

/// `S⁻¹ (dL/ds) S`, whose entries are `⟨⟨E_α^(i)|dL/ds|D_β^(j)⟩⟩`.
fn projected(track: &JordanTrack, derivatives: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    if derivatives.len() != track.len() {
        return Err(Error::Shape(format!(
            "{} derivative samples for {} grid points",
            derivatives.len(),
            track.len()
        )));
    }
    derivatives
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let f = track.form(i);
            if d.shape() != (f.dim(), f.dim()) {
                return Err(Error::Shape(format!("derivative is {:?}, generator {}x{}", d.shape(), f.dim(), f.dim())));
            }
            Ok(f.similarity_inverse() * d * f.similarity())
        })
        .collect()
}

fn distinct_pairs(track: &JordanTrack) -> Vec<(usize, usize)> {
    let m = track.blocks();
    (0..m)
        .flat_map(|a| (0..m).map(move |b| (a, b)))
        .filter(|&(a, b)| track.distinct(a, b))
        .collect()
}

fn check_gaps(track: &JordanTrack, pairs: &[(usize, usize)]) -> Result<()> {
    for &(a, b) in pairs {
        for i in 0..track.len() {
            let w = track.omega(i, b, a).norm();
            if w < OMEGA_FLOOR {
                return Err(Error::Conditioning {
                    s: track.grid()[i],
                    value: w,
                });
            }
        }
    }
    Ok(())
}

fn sign(total: usize) -> f64 {
    if total % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    /// `max_s |Σ_p Σ_k ⟨⟨E_α^(i+p−1)|L′|D_β^(j−S_p)⟩⟩ / ((−1)^{S_p} ω_βα^{p+S_p})|`
    pub metric: f64,
    pub at_s: f64,
    pub term_count: u128,
    /// `N × max_s max_{p,S} |single term|`
    pub corollary_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenCondition {
    pub entries: Vec<ConditionEntry>,
    pub max_metric: f64,
    pub max_corollary_bound: f64,
}

pub fn open_condition_metric(track: &JordanTrack, spec: &GeneratorSpec) -> Result<OpenCondition> {
    let d = generator_derivatives(track, spec)?;
    open_condition_metric_from_derivatives(track, &d)
}

/// Nested sum evaluated with the multiplicity `C(S + p − 1, p − 1)` of each
/// `(p, S_p)` pair instead of enumerating the tuples.
pub fn open_condition_metric_from_derivatives(track: &JordanTrack, derivatives: &[ComplexMatrix]) -> Result<OpenCondition> {
    let g = projected(track, derivatives)?;
    let pairs = distinct_pairs(track);
    check_gaps(track, &pairs)?;
    let sizes = track.block_sizes();
    let offsets = track.offsets();
    let mut entries = Vec::new();
    for &(alpha, beta) in &pairs {
        let (na, nb) = (sizes[alpha], sizes[beta]);
        let (oa, ob) = (offsets[alpha], offsets[beta]);
        for i in 0..na {
            for j in 0..nb {
                let mut metric: f64 = 0.0;
                let mut at_s = 0.0;
                let mut single: f64 = 0.0;
                for (k, gk) in g.iter().enumerate() {
                    let w = track.omega(k, beta, alpha);
                    let mut sum = Complex64::new(0.0, 0.0);
                    for p in 1..=na - i {
                        for total in 0..=j {
                            let term = gk[(oa + i + p - 1, ob + j - total)] / w.powu((p + total) as u32);
                            single = single.max(term.norm());
                            sum += term * (sign(total) * tuple_multiplicity(p, total));
                        }
                    }
                    if sum.norm() > metric {
                        metric = sum.norm();
                        at_s = track.grid()[k];
                    }
                }
                let term_count = condition_term_count(na, i, j)?;
                entries.push(ConditionEntry {
                    alpha,
                    beta,
                    i,
                    j,
                    metric,
                    at_s,
                    term_count,
                    corollary_bound: term_count as f64 * single,
                });
            }
        }
    }
    let max_metric = entries.iter().map(|e| e.metric).fold(0.0, f64::max);
    let max_corollary_bound = entries.iter().map(|e| e.corollary_bound).fold(0.0, f64::max);
    Ok(OpenCondition {
        entries,
        max_metric,
        max_corollary_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "guaranteed")]
    Guaranteed,
    #[serde(rename = "oscillatory-RL")]
    OscillatoryRl,
    #[serde(rename = "decaying")]
    Decaying,
    #[serde(rename = "compensated")]
    Compensated,
    #[serde(rename = "finite-window")]
    FiniteWindow,
    #[serde(rename = "model-dependent")]
    ModelDependent,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Guaranteed => "guaranteed",
            Regime::OscillatoryRl => "oscillatory-RL",
            Regime::Decaying => "decaying",
            Regime::Compensated => "compensated",
            Regime::FiniteWindow => "finite-window",
            Regime::ModelDependent => "model-dependent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairRegime {
    pub alpha: usize,
    pub beta: usize,
    pub regime: Regime,
    /// Extremes of `Re ∫₀ˢ ω_βα ds′` (multiply by `T` for `Re Ω`).
    pub max_re_omega: f64,
    pub min_re_omega: f64,
    pub im_omega_variation: f64,
    /// `max |V_βα^(ijp)|` over all indices and the grid.
    pub max_v: f64,
}

fn check_coefficients(track: &JordanTrack, c: &JordanCoefficients) -> Result<()> {
    let same_grid = c.grid().len() == track.len()
        && c.grid().iter().zip(track.grid()).all(|(a, b)| (a - b).abs() <= 1e-12);
    if !same_grid || c.block_sizes() != track.block_sizes() {
        return Err(Error::Shape("coefficients do not belong to this Jordan track".into()));
    }
    Ok(())
}

/// `V_βα^(ijp)(s)` for one `(α, β, i, j, p, S_p)`.
fn v_curve(
    g: &[ComplexMatrix],
    c: &JordanCoefficients,
    (oa, ob): (usize, usize),
    (alpha_i, beta, j, p, total): (usize, usize, usize, usize, usize),
) -> Vec<Complex64> {
    g.iter()
        .enumerate()
        .map(|(k, gk)| c.get(k, beta, j) * gk[(oa + alpha_i + p - 1, ob + j - total)])
        .collect()
}

fn omega_integral(track: &JordanTrack, beta: usize, alpha: usize) -> Vec<Complex64> {
    (0..track.len()).map(|i| track.big_omega(i, beta, alpha, 1.0)).collect()
}

pub fn classify_regime(track: &JordanTrack, spec: &GeneratorSpec, coeffs: &JordanCoefficients) -> Result<Vec<PairRegime>> {
    let d = generator_derivatives(track, spec)?;
    classify_regime_from_derivatives(track, &d, coeffs)
}

/// Labels each ordered pair `(α, β)` with `λ_α ≠ λ_β`. The sign structure of
/// `Re Ω_βα` is examined first; `V ≡ 0` decides only pairs where `Re Ω`
/// becomes positive.
pub fn classify_regime_from_derivatives(
    track: &JordanTrack,
    derivatives: &[ComplexMatrix],
    coeffs: &JordanCoefficients,
) -> Result<Vec<PairRegime>> {
    check_coefficients(track, coeffs)?;
    let g = projected(track, derivatives)?;
    let sizes = track.block_sizes();
    let offsets = track.offsets();
    let t = coeffs.total_time();
    let g_scale = g.iter().map(|m| m.camax()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for (alpha, beta) in distinct_pairs(track) {
        let w = omega_integral(track, beta, alpha);
        let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let tol = 1e-9 * scale;
        let max_re = w.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        let min_re = w.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let im_var = w.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max)
            - w.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);

        let mut max_v: f64 = 0.0;
        let mut p_scale: f64 = 0.0;
        for j in 0..sizes[beta] {
            p_scale = p_scale.max(coeffs.curve(beta, j).iter().map(|z| z.norm()).fold(0.0, f64::max));
            for i in 0..sizes[alpha] {
                for p in 1..=sizes[alpha] - i {
                    for total in 0..=j {
                        let v = v_curve(&g, coeffs, (offsets[alpha], offsets[beta]), (i, beta, j, p, total));
                        max_v = max_v.max(v.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    }
                }
            }
        }
        let v_zero = max_v <= 1e-12 * (p_scale * g_scale).max(1.0);

        let compensated = || {
            (0..sizes[beta]).all(|j| {
                let curve = coeffs.curve(beta, j);
                let c0 = curve[0].norm().max(f64::MIN_POSITIVE);
                curve.iter().zip(&w).all(|(p, om)| {
                    let e = t * om.re;
                    p.norm() == 0.0 || (e <= EXP_LIMIT && p.norm() * e.exp() <= 10.0 * c0)
                })
            })
        };

        let regime = if max_re <= tol && min_re >= -tol {
            if im_var > tol {
                Regime::OscillatoryRl
            } else {
                Regime::ModelDependent
            }
        } else if max_re <= tol {
            Regime::Decaying
        } else if v_zero {
            Regime::Guaranteed
        } else if compensated() {
            Regime::Compensated
        } else if min_re >= -tol {
            Regime::FiniteWindow
        } else {
            Regime::ModelDependent
        };
        out.push(PairRegime {
            alpha,
            beta,
            regime,
            max_re_omega: max_re,
            min_re_omega: min_re,
            im_omega_variation: im_var,
            max_v,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConditionOptions {
    /// `T ≥ margin · bound(T)` counts as satisfied.
    pub margin: f64,
}

impl Default for TimeConditionOptions {
    fn default() -> Self {
        TimeConditionOptions { margin: 10.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientBound {
    pub alpha: usize,
    pub i: usize,
    /// Number of blocks with `λ_β ≠ λ_α`.
    pub blocks: usize,
    /// `Σ_β M` over the contributing blocks.
    pub term_count: u128,
    /// Right side of the time condition, per `T`.
    pub bounds: Vec<f64>,
    /// `max_s |Σ ∫ e^{TΩ} d/ds′(V/ω^{p+S+1})|`, per `T`.
    pub integral_terms: Vec<f64>,
    /// `M × max single bracket`, per `T`.
    pub corollary_bounds: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub first_satisfied: Option<f64>,
    pub crossover: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VSample {
    pub alpha: usize,
    pub beta: usize,
    pub i: usize,
    pub j: usize,
    pub p: usize,
    pub s_p: usize,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenTimeCondition {
    pub t_grid: Vec<f64>,
    pub margin: f64,
    pub coefficients: Vec<CoefficientBound>,
    pub regimes: Vec<PairRegime>,
    /// `V` curves for the first coefficient set.
    pub v_samples: Vec<VSample>,
    /// All coefficients satisfied, per `T`.
    pub satisfied: Vec<bool>,
    pub first_satisfied: Option<f64>,
    pub crossover: Option<f64>,
}

/// `∫₀^{1} e^{z u} du` and `∫₀^{1} u e^{z u} du`.
fn phi(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let z3 = z2 * z;
        (1.0 + z / 2.0 + z2 / 6.0 + z3 / 24.0, 0.5 + z / 3.0 + z2 / 8.0 + z3 / 30.0)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e * (z - 1.0) + 1.0) / (z * z))
    }
}

/// Running `∫₀ˢ e^{E(s′)} g(s′) ds′` with `E` and `g` linear between nodes,
/// integrated exactly on each interval.
fn weighted_cumulative(grid: &[f64], exponent: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(grid.len());
    out.push(acc);
    for k in 1..grid.len() {
        let h = grid[k] - grid[k - 1];
        let (p1, p2) = phi(exponent[k] - exponent[k - 1]);
        acc += exponent[k - 1].exp() * h * (g[k - 1] * p1 + (g[k] - g[k - 1]) * p2);
        out.push(acc);
    }
    out
}

fn runs(t_grid: &[f64], satisfied: &[bool]) -> (Option<f64>, Option<f64>) {
    let first = satisfied.iter().position(|&x| x);
    let crossover = first.and_then(|f| {
        let end = satisfied[f..].iter().position(|&x| !x).map(|e| f + e);
        end.map(|e| t_grid[e - 1])
    });
    (first.map(|f| t_grid[f]), crossover)
}

pub fn open_time_condition(
    track: &JordanTrack,
    spec: &GeneratorSpec,
    coeffs: &[JordanCoefficients],
    t_grid: &[f64],
    opts: &TimeConditionOptions,
) -> Result<OpenTimeCondition> {
    let d = generator_derivatives(track, spec)?;
    open_time_condition_from_derivatives(track, &d, coeffs, t_grid, opts)
}

/// Evaluates the time condition for every coefficient `(α, i)` and every `T`.
///
/// `coeffs` holds either one set, used at every `T`, or one set per entry
/// of `t_grid` extracted from a trajectory at that `T`.
pub fn open_time_condition_from_derivatives(
    track: &JordanTrack,
    derivatives: &[ComplexMatrix],
    coeffs: &[JordanCoefficients],
    t_grid: &[f64],
    opts: &TimeConditionOptions,
) -> Result<OpenTimeCondition> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Input("T grid must hold positive finite values".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("T grid must be strictly increasing".into()));
    }
    if !(opts.margin > 0.0) {
        return Err(Error::Input("margin must be positive".into()));
    }
    if coeffs.len() != 1 && coeffs.len() != t_grid.len() {
        return Err(Error::Input(format!(
            "{} coefficient sets for {} values of T; give one or one per T",
            coeffs.len(),
            t_grid.len()
        )));
    }
    if coeffs.len() > 1 {
        for (c, &t) in coeffs.iter().zip(t_grid) {
            if (c.total_time() - t).abs() > 1e-9 * t {
                return Err(Error::Input(format!("coefficient set for T = {} listed at T = {t}", c.total_time())));
            }
        }
    }
    for c in coeffs {
        check_coefficients(track, c)?;
    }
    let g = projected(track, derivatives)?;
    let pairs = distinct_pairs(track);
    check_gaps(track, &pairs)?;
    let grid = track.grid();
    let n = grid.len();
    if n < 3 {
        return Err(Error::Resolution("time condition needs at least three grid points".into()));
    }
    let sizes = track.block_sizes();
    let offsets = track.offsets();
    let m = track.blocks();
    let omegas: Vec<Vec<Complex64>> = (0..m * m)
        .map(|ab| omega_integral(track, ab % m, ab / m))
        .collect();
    let g_scale = g.iter().map(|x| x.camax()).fold(0.0, f64::max);

    let mut v_samples = Vec::new();
    let mut coefficient_bounds = Vec::new();
    for alpha in 0..m {
        let partners: Vec<usize> = (0..m).filter(|&b| track.distinct(alpha, b)).collect();
        for i in 0..sizes[alpha] {
            let mut term_count: u128 = 0;
            for &beta in &partners {
                term_count += time_term_count(sizes[alpha], sizes[beta], i, 1)?;
            }
            let mut bounds = Vec::with_capacity(t_grid.len());
            let mut integral_terms = Vec::with_capacity(t_grid.len());
            let mut corollary_bounds = Vec::with_capacity(t_grid.len());
            for (ti, &t) in t_grid.iter().enumerate() {
                let c = &coeffs[if coeffs.len() == 1 { 0 } else { ti }];
                let mut total = vec![Complex64::new(0.0, 0.0); n];
                let mut integral = vec![Complex64::new(0.0, 0.0); n];
                let mut single: f64 = 0.0;
                let mut overflow = false;
                for &beta in &partners {
                    let w = &omegas[alpha * m + beta];
                    let exponent: Vec<Complex64> = w.iter().map(|z| z * t).collect();
                    let grows = exponent.iter().any(|e| e.re > EXP_LIMIT);
                    for j in 0..sizes[beta] {
                        for p in 1..=sizes[alpha] - i {
                            for s_p in 0..=j {
                                let v = v_curve(&g, c, (offsets[alpha], offsets[beta]), (i, beta, j, p, s_p));
                                if ti == 0 {
                                    v_samples.push(VSample {
                                        alpha,
                                        beta,
                                        i,
                                        j,
                                        p,
                                        s_p,
                                        values: v.iter().map(|z| [z.re, z.im]).collect(),
                                    });
                                }
                                let v_max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                                let p_max = c.curve(beta, j).iter().map(|z| z.norm()).fold(0.0, f64::max);
                                if v_max <= 1e-300 || v_max <= 1e-15 * (p_max * g_scale) {
                                    continue;
                                }
                                if grows {
                                    overflow = true;
                                    continue;
                                }
                                let power = (p + s_p + 1) as u32;
                                let f: Vec<Complex64> = (0..n)
                                    .map(|k| v[k] / track.omega(k, beta, alpha).powu(power))
                                    .collect();
                                let df: Vec<Complex64> = (0..n)
                                    .map(|k| derivative_stencil(grid, k).iter().map(|&(q, wq)| f[q] * wq).sum())
                                    .collect();
                                let cum = weighted_cumulative(grid, &exponent, &df);
                                let weight = sign(s_p) * tuple_multiplicity(p, s_p);
                                for k in 0..n {
                                    let bracket = f[0] - f[k] * exponent[k].exp() + cum[k];
                                    single = single.max(bracket.norm());
                                    total[k] += bracket * weight;
                                    integral[k] += cum[k] * weight;
                                }
                            }
                        }
                    }
                }
                if overflow {
                    bounds.push(f64::INFINITY);
                    integral_terms.push(f64::INFINITY);
                    corollary_bounds.push(f64::INFINITY);
                } else {
                    bounds.push(total.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    integral_terms.push(integral.iter().map(|z| z.norm()).fold(0.0, f64::max));
                    corollary_bounds.push(term_count as f64 * single);
                }
            }
            let satisfied: Vec<bool> = t_grid.iter().zip(&bounds).map(|(t, b)| *t >= opts.margin * b).collect();
            let (first_satisfied, crossover) = runs(t_grid, &satisfied);
            coefficient_bounds.push(CoefficientBound {
                alpha,
                i,
                blocks: partners.len(),
                term_count,
                bounds,
                integral_terms,
                corollary_bounds,
                satisfied,
                first_satisfied,
                crossover,
            });
        }
    }
    let satisfied: Vec<bool> = (0..t_grid.len())
        .map(|k| coefficient_bounds.iter().all(|c| c.satisfied[k]))
        .collect();
    let (first_satisfied, crossover) = runs(t_grid, &satisfied);
    let regimes = classify_regime_from_derivatives(track, derivatives, &coeffs[0])?;
    Ok(OpenTimeCondition {
        t_grid: t_grid.to_vec(),
        margin: opts.margin,
        coefficients: coefficient_bounds,
        regimes,
        v_samples,
        satisfied,
        first_satisfied,
        crossover,
    })
}
