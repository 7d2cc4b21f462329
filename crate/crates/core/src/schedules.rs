//! Time-dependent generators over normalized time `s = t/T ∈ [0, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{ensure_square, is_hermitian, serde_matrix, sigma_x, sigma_y, sigma_z, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-12;

/// Scalar envelope `f(s)` with an analytic derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Constant { value: f64 },
    /// `intercept + slope·s`
    Linear { intercept: f64, slope: f64 },
    /// `Σ c_k s^k`
    Polynomial { coefficients: Vec<f64> },
    /// `from + (to − from)(1 − cos πs)/2`
    CosineRamp { from: f64, to: f64 },
    /// `amplitude·sin(2π·frequency·s + phase) + offset`
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl Envelope {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Envelope::Constant { value } => *value,
            Envelope::Linear { intercept, slope } => intercept + slope * s,
            Envelope::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c),
            Envelope::CosineRamp { from, to } => from + (to - from) * (1.0 - (PI * s).cos()) / 2.0,
            Envelope::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => amplitude * (2.0 * PI * frequency * s + phase).sin() + offset,
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Envelope::Constant { .. } => 0.0,
            Envelope::Linear { slope, .. } => *slope,
            Envelope::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * s + k as f64 * c),
            Envelope::CosineRamp { from, to } => (to - from) * PI * (PI * s).sin() / 2.0,
            Envelope::Sinusoid {
                amplitude,
                frequency,
                phase,
                ..
            } => amplitude * 2.0 * PI * frequency * (2.0 * PI * frequency * s + phase).cos(),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match self {
            Envelope::Constant { value } => value.is_finite(),
            Envelope::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            Envelope::Polynomial { coefficients } => coefficients.iter().all(|c| c.is_finite()),
            Envelope::CosineRamp { from, to } => from.is_finite() && to.is_finite(),
            Envelope::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset].iter().all(|x| x.is_finite()),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::Input("envelope parameters must be finite".into()))
        }
    }
}

/// A constant matrix times a scalar envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "serde_matrix")]
    pub matrix: ComplexMatrix,
    pub envelope: Envelope,
}

impl Term {
    pub fn new(matrix: ComplexMatrix, envelope: Envelope) -> Self {
        Term { matrix, envelope }
    }

    pub fn constant(matrix: ComplexMatrix) -> Self {
        Term::new(matrix, Envelope::Constant { value: 1.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Closed,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference { step: f64 },
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::Analytic
    }
}

/// `H(s) = Σ terms`, and for open systems `Γ_i(s) = Σ terms_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSpec {
    dim: usize,
    kind: SystemKind,
    hamiltonian: Vec<Term>,
    lindblad: Vec<Vec<Term>>,
    derivative: DerivativeMode,
}

/// `H(s)` together with `Γ_i(s)` (empty for closed systems).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorValue {
    pub hamiltonian: ComplexMatrix,
    pub lindblad: Vec<ComplexMatrix>,
}

impl GeneratorSpec {
    pub fn closed(dim: usize, hamiltonian: Vec<Term>) -> Result<Self> {
        Self::build(dim, SystemKind::Closed, hamiltonian, Vec::new())
    }

    pub fn open(dim: usize, hamiltonian: Vec<Term>, lindblad: Vec<Vec<Term>>) -> Result<Self> {
        Self::build(dim, SystemKind::Open, hamiltonian, lindblad)
    }

    fn build(dim: usize, kind: SystemKind, hamiltonian: Vec<Term>, lindblad: Vec<Vec<Term>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("dimension must be positive".into()));
        }
        if kind == SystemKind::Closed && !lindblad.is_empty() {
            return Err(Error::Input("closed systems take no Lindblad operators".into()));
        }
        for (idx, term) in hamiltonian.iter().chain(lindblad.iter().flatten()).enumerate() {
            let d = ensure_square(&term.matrix, "term matrix")?;
            if d != dim {
                return Err(Error::Shape(format!("term {idx} is {d}x{d}, expected {dim}x{dim}")));
            }
            if term.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Input(format!("term {idx} has non-finite entries")));
            }
            term.envelope.validate()?;
        }
        for (idx, term) in hamiltonian.iter().enumerate() {
            if !is_hermitian(&term.matrix, HERMITIAN_TOL) {
                return Err(Error::Input(format!("Hamiltonian term {idx} is not Hermitian")));
            }
        }
        Ok(GeneratorSpec {
            dim,
            kind,
            hamiltonian,
            lindblad,
            derivative: DerivativeMode::Analytic,
        })
    }

    pub fn with_derivative(mut self, mode: DerivativeMode) -> Result<Self> {
        if let DerivativeMode::FiniteDifference { step } = mode {
            if !(step > 0.0 && step < 0.5) {
                return Err(Error::Input(format!("finite-difference step {step} outside (0, 0.5)")));
            }
        }
        self.derivative = mode;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative
    }

    /// The same Hamiltonian as an open system without Lindblad operators.
    pub fn to_open(&self) -> GeneratorSpec {
        GeneratorSpec {
            kind: SystemKind::Open,
            ..self.clone()
        }
    }

    pub fn hamiltonian_terms(&self) -> &[Term] {
        &self.hamiltonian
    }

    pub fn lindblad_terms(&self) -> &[Vec<Term>] {
        &self.lindblad
    }

    fn sum(&self, terms: &[Term], s: f64, derivative: bool) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for t in terms {
            let w = if derivative { t.envelope.derivative(s) } else { t.envelope.value(s) };
            if w != 0.0 {
                m += &t.matrix * Complex64::new(w, 0.0);
            }
        }
        m
    }

    fn eval_unchecked(&self, s: f64) -> GeneratorValue {
        GeneratorValue {
            hamiltonian: self.sum(&self.hamiltonian, s, false),
            lindblad: self.lindblad.iter().map(|t| self.sum(t, s, false)).collect(),
        }
    }

    /// Hermitian `H(s)` for the Schrödinger equation.
    pub fn hamiltonian(&self, s: f64) -> Result<ComplexMatrix> {
        check_domain(s)?;
        Ok(self.sum(&self.hamiltonian, s, false))
    }
}

fn check_domain(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Domain { s })
    }
}

pub fn eval_generator(spec: &GeneratorSpec, s: f64) -> Result<GeneratorValue> {
    check_domain(s)?;
    Ok(spec.eval_unchecked(s))
}

/// `dH/ds` and `dΓ_i/ds`, analytic or by finite differences (central in the
/// interior, one-sided where the stencil would leave `[0, 1]`).
pub fn eval_generator_derivative(spec: &GeneratorSpec, s: f64) -> Result<GeneratorValue> {
    check_domain(s)?;
    match spec.derivative {
        DerivativeMode::Analytic => Ok(GeneratorValue {
            hamiltonian: spec.sum(&spec.hamiltonian, s, true),
            lindblad: spec.lindblad.iter().map(|t| spec.sum(t, s, true)).collect(),
        }),
        DerivativeMode::FiniteDifference { step } => {
            let (lo, hi) = ((s - step).max(0.0), (s + step).min(1.0));
            let a = spec.eval_unchecked(lo);
            let b = spec.eval_unchecked(hi);
            let w = Complex64::new(1.0 / (hi - lo), 0.0);
            Ok(GeneratorValue {
                hamiltonian: (b.hamiltonian - a.hamiltonian) * w,
                lindblad: b
                    .lindblad
                    .into_iter()
                    .zip(a.lindblad)
                    .map(|(x, y)| (x - y) * w)
                    .collect(),
            })
        }
    }
}

/// Built-in model families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum Model {
    /// `H(s) = a(2s − 1)σz + Δσx`
    LandauZener { a: f64, delta: f64 },
    /// `H(s) = b[sinθ cos(2πs)σx + sinθ sin(2πs)σy + cosθ σz]`
    RotatingField { b: f64, theta: f64 },
    /// `H(s) = (1 − s)H₀ + sH₁`
    LinearInterp {
        #[serde(with = "serde_matrix")]
        h0: ComplexMatrix,
        #[serde(with = "serde_matrix")]
        h1: ComplexMatrix,
    },
    /// `H = (ω/2)σz`, `Γ = √(γ/2)σz`; optional envelopes multiply ω and `Γ`.
    DephasingQubit {
        omega: f64,
        gamma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega_envelope: Option<Envelope>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_envelope: Option<Envelope>,
    },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::LandauZener { .. } => "landau_zener",
            Model::RotatingField { .. } => "rotating_field",
            Model::LinearInterp { .. } => "linear_interp",
            Model::DephasingQubit { .. } => "dephasing_qubit",
        }
    }

    pub fn spec(&self) -> Result<GeneratorSpec> {
        let finite = |xs: &[f64]| -> Result<()> {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::Config(format!("{}: parameters must be finite", self.name())))
            }
        };
        match self {
            Model::LandauZener { a, delta } => {
                finite(&[*a, *delta])?;
                GeneratorSpec::closed(
                    2,
                    vec![
                        Term::new(sigma_z(), Envelope::Linear { intercept: -a, slope: 2.0 * a }),
                        Term::new(sigma_x(), Envelope::Constant { value: *delta }),
                    ],
                )
            }
            Model::RotatingField { b, theta } => {
                finite(&[*b, *theta])?;
                let st = b * theta.sin();
                GeneratorSpec::closed(
                    2,
                    vec![
                        Term::new(
                            sigma_x(),
                            Envelope::Sinusoid {
                                amplitude: st,
                                frequency: 1.0,
                                phase: PI / 2.0,
                                offset: 0.0,
                            },
                        ),
                        Term::new(
                            sigma_y(),
                            Envelope::Sinusoid {
                                amplitude: st,
                                frequency: 1.0,
                                phase: 0.0,
                                offset: 0.0,
                            },
                        ),
                        Term::new(sigma_z(), Envelope::Constant { value: b * theta.cos() }),
                    ],
                )
            }
            Model::LinearInterp { h0, h1 } => {
                let d = ensure_square(h0, "h0")?;
                GeneratorSpec::closed(
                    d,
                    vec![
                        Term::new(h0.clone(), Envelope::Linear { intercept: 1.0, slope: -1.0 }),
                        Term::new(h1.clone(), Envelope::Linear { intercept: 0.0, slope: 1.0 }),
                    ],
                )
            }
            Model::DephasingQubit {
                omega,
                gamma,
                omega_envelope,
                gamma_envelope,
            } => {
                finite(&[*omega, *gamma])?;
                if *gamma < 0.0 {
                    return Err(Error::Config("dephasing_qubit: gamma must be nonnegative".into()));
                }
                let h = sigma_z() * Complex64::new(omega / 2.0, 0.0);
                let g = sigma_z() * Complex64::new((gamma / 2.0).sqrt(), 0.0);
                let one = Envelope::Constant { value: 1.0 };
                GeneratorSpec::open(
                    2,
                    vec![Term::new(h, omega_envelope.clone().unwrap_or(one.clone()))],
                    vec![vec![Term::new(g, gamma_envelope.clone().unwrap_or(one))]],
                )
            }
        }
    }
}

/// Builds a built-in model from its name and a JSON parameter object.
pub fn make_model(name: &str, params: &serde_json::Value) -> Result<GeneratorSpec> {
    model_from_json(name, params)?.spec()
}

pub fn model_from_json(name: &str, params: &serde_json::Value) -> Result<Model> {
    const KNOWN: [&str; 4] = ["landau_zener", "rotating_field", "linear_interp", "dephasing_qubit"];
    if !KNOWN.contains(&name) {
        return Err(Error::Config(format!("unknown model '{name}'")));
    }
    let tagged = serde_json::json!({ "model": name, "params": params });
    serde_json::from_value(tagged).map_err(|e| Error::Config(format!("{name}: {e}")))
}

/// Total evolution time and normalized-time output grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    total_time: f64,
    grid: Vec<f64>,
}

impl Schedule {
    pub fn new(total_time: f64, grid: Vec<f64>) -> Result<Self> {
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::Input(format!("total time must be positive, got {total_time}")));
        }
        validate_grid(&grid)?;
        Ok(Schedule { total_time, grid })
    }

    pub fn uniform(total_time: f64, points: usize) -> Result<Self> {
        Schedule::new(total_time, uniform_grid(points)?)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.iter().map(|s| s * self.total_time).collect()
    }
}

/// `points` equally spaced values from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Input("grid needs at least two points".into()));
    }
    let n = (points - 1) as f64;
    Ok((0..points).map(|k| if k + 1 == points { 1.0 } else { k as f64 / n }).collect())
}

/// Strictly increasing, inside `[0, 1]`, starting at 0 and ending at 1.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Input("grid needs at least two points".into()));
    }
    if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
        return Err(Error::Input("grid must start at 0 and end at 1".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("grid must be strictly increasing".into()));
    }
    Ok(())
}

impl GeneratorValue {
    pub fn zero(dim: usize, n_lindblad: usize) -> Self {
        GeneratorValue {
            hamiltonian: ComplexMatrix::zeros(dim, dim),
            lindblad: vec![ComplexMatrix::zeros(dim, dim); n_lindblad],
        }
    }
}
