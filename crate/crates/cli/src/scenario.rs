//! Scenario files, schema version 1.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "lz",
//!   "model": "landau_zener",
//!   "params": {"a": 1.0, "delta": 0.25},
//!   "initial_state": {"level": 0},
//!   "total_time": 8.0,
//!   "grid_points": 201
//! }
//! ```
//!
//! The generator is either `model` + `params` (`landau_zener`,
//! `rotating_field`, `linear_interp`, `dephasing_qubit`) or explicit
//! `kind`, `dim`, `terms` and, for open systems, `lindblad` (one term list
//! per operator). A term is `{"matrix": [[[re, im], ...], ...],
//! "envelope": {"kind": "constant", "value": 1.0}}`.
//!
//! Optional fields: `derivative` (`{"mode": "analytic"}` or
//! `{"mode": "finite_difference", "step": 1e-5}`), `initial_state`
//! (`{"level": n}`, `{"vector": [[re, im], ...]}` or
//! `{"density": [[[re, im], ...], ...]}`), `total_time`, `sweep`
//! (`{"t_min", "t_max", "points", "spacing": "linear" | "log"}`),
//! `grid_points` (default 201), `tolerances` (`{"abs", "rel"}`),
//! `gap_floor` (default 1e-10), `level` (default 0), `order` (Wu order,
//! default 2), `pipeline` (`evolve`, `check`, `jordan`, `consistency`,
//! used by `run`) and `output_dir`.

use std::path::Path;

use adiabat_core::numkit::serde_matrix;
use adiabat_core::numkit::{eigh, ComplexMatrix, ComplexVector};
use adiabat_core::ode::Tolerances;
use adiabat_core::schedules::{model_from_json, DerivativeMode, GeneratorSpec, Term};
use adiabat_core::SystemKind;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::Failure;

pub const SCHEMA_VERSION: u32 = 1;

fn default_grid_points() -> usize {
    201
}

fn default_gap_floor() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SystemKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad: Option<Vec<Vec<Term>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<DerivativeMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_gap_floor")]
    pub gap_floor: f64,
    #[serde(default)]
    pub level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Pipeline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InitialState {
    Level {
        level: usize,
    },
    Vector {
        #[serde(with = "serde_matrix::vector")]
        vector: ComplexVector,
    },
    Density {
        #[serde(with = "serde_matrix")]
        density: ComplexMatrix,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Evolve,
    Check,
    Jordan,
    Consistency,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Evolve => "evolve",
            Pipeline::Check => "check",
            Pipeline::Jordan => "jordan",
            Pipeline::Consistency => "consistency",
        }
    }
}

impl Sweep {
    pub fn values(&self) -> Result<Vec<f64>, Failure> {
        if !(self.t_min > 0.0 && self.t_min.is_finite() && self.t_max.is_finite()) {
            return Err(Failure::schema("sweep", "t_min and t_max must be positive and finite"));
        }
        if !(self.t_min < self.t_max) {
            return Err(Failure::schema("sweep", "t_min must be below t_max"));
        }
        if self.points < 2 {
            return Err(Failure::schema("sweep.points", "at least two points are needed"));
        }
        let n = self.points - 1;
        Ok((0..self.points)
            .map(|k| {
                let x = k as f64 / n as f64;
                if k == 0 {
                    return self.t_min;
                }
                if k == n {
                    return self.t_max;
                }
                match self.spacing {
                    Spacing::Linear => self.t_min + (self.t_max - self.t_min) * x,
                    Spacing::Log => (self.t_min.ln() + (self.t_max.ln() - self.t_min.ln()) * x).exp(),
                }
            })
            .collect())
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, Failure> {
        let value: Value = serde_json::from_str(text).map_err(|e| Failure::schema("", &e.to_string()))?;
        match value.get("schema") {
            None => return Err(Failure::schema("schema", "missing schema version")),
            Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => {
                return Err(Failure::schema("schema", &format!("unsupported schema version {v}, expected {SCHEMA_VERSION}")))
            }
            _ => {}
        }
        let scenario: Scenario = serde_json::from_value(value).map_err(|e| Failure::schema("", &e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<(Scenario, Vec<u8>), Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Failure::schema("", "scenario is not UTF-8"))?;
        Ok((Scenario::parse(text)?, bytes))
    }

    fn validate(&self) -> Result<(), Failure> {
        match (&self.model, &self.terms) {
            (Some(_), Some(_)) => return Err(Failure::schema("terms", "give either model or terms, not both")),
            (None, None) => return Err(Failure::schema("model", "a model or explicit terms are required")),
            (Some(_), None) => {
                for (field, present) in [
                    ("kind", self.kind.is_some()),
                    ("dim", self.dim.is_some()),
                    ("lindblad", self.lindblad.is_some()),
                ] {
                    if present {
                        return Err(Failure::schema(field, "only allowed with explicit terms"));
                    }
                }
            }
            (None, Some(_)) => {
                if self.params.is_some() {
                    return Err(Failure::schema("params", "only allowed with a model"));
                }
            }
        }
        if self.grid_points < 3 {
            return Err(Failure::schema("grid_points", "at least three grid points are needed"));
        }
        if let Some(t) = self.total_time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::schema("total_time", "must be positive and finite"));
            }
        }
        if !(self.gap_floor >= 0.0 && self.gap_floor.is_finite()) {
            return Err(Failure::schema("gap_floor", "must be nonnegative and finite"));
        }
        if let Some(sweep) = &self.sweep {
            sweep.values()?;
        }
        Tolerances::new(self.tolerances.abs, self.tolerances.rel)
            .map_err(|e| Failure::schema("tolerances", &e.to_string()))?;
        Ok(())
    }

    pub fn generator(&self) -> Result<GeneratorSpec, Failure> {
        let spec = match (&self.model, &self.terms) {
            (Some(name), _) => {
                let params = self.params.clone().unwrap_or(Value::Object(Default::default()));
                model_from_json(name, &params)
                    .and_then(|m| m.spec())
                    .map_err(|e| Failure::core_in("params", e))?
            }
            (None, Some(terms)) => {
                let dim = match self.dim {
                    Some(d) => d,
                    None => terms
                        .first()
                        .map(|t| t.matrix.nrows())
                        .ok_or_else(|| Failure::schema("terms", "at least one term is required"))?,
                };
                let kind = self.kind.unwrap_or(if self.lindblad.is_some() {
                    SystemKind::Open
                } else {
                    SystemKind::Closed
                });
                match kind {
                    SystemKind::Closed => {
                        if self.lindblad.is_some() {
                            return Err(Failure::schema("lindblad", "closed systems take no Lindblad operators"));
                        }
                        GeneratorSpec::closed(dim, terms.clone())
                    }
                    SystemKind::Open => GeneratorSpec::open(dim, terms.clone(), self.lindblad.clone().unwrap_or_default()),
                }
                .map_err(|e| Failure::core_in("terms", e))?
            }
            (None, None) => unreachable!("validated"),
        };
        match self.derivative {
            Some(mode) => spec.with_derivative(mode).map_err(|e| Failure::core_in("derivative", e)),
            None => Ok(spec),
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points - 1;
        (0..=n).map(|k| if k == n { 1.0 } else { k as f64 / n as f64 }).collect()
    }

    pub fn total_time(&self) -> Result<f64, Failure> {
        self.total_time
            .ok_or_else(|| Failure::schema("total_time", "required by this command (or pass --T)"))
    }

    /// Initial pure state; `level` picks an eigenvector of `H(0)`.
    pub fn initial_vector(&self, spec: &GeneratorSpec) -> Result<ComplexVector, Failure> {
        match self.initial_state.clone().unwrap_or(InitialState::Level { level: self.level }) {
            InitialState::Level { level } => eigenvector(spec, level),
            InitialState::Vector { vector } => {
                if vector.len() != spec.dim() {
                    return Err(Failure::schema(
                        "initial_state.vector",
                        &format!("has {} components, expected {}", vector.len(), spec.dim()),
                    ));
                }
                if (vector.norm() - 1.0).abs() > 1e-10 {
                    return Err(Failure::schema("initial_state.vector", "must have unit norm"));
                }
                Ok(vector)
            }
            InitialState::Density { .. } => Err(Failure::schema(
                "initial_state",
                "closed systems need a state vector or a level",
            )),
        }
    }

    pub fn initial_density(&self, spec: &GeneratorSpec) -> Result<ComplexMatrix, Failure> {
        match self.initial_state.clone().unwrap_or(InitialState::Level { level: self.level }) {
            InitialState::Density { density } => {
                adiabat_core::open::validate_density(&density)
                    .map_err(|e| Failure::core_in("initial_state.density", e))?;
                Ok(density)
            }
            _ => {
                let v = self.initial_vector(spec)?;
                Ok(&v * v.adjoint())
            }
        }
    }
}

fn eigenvector(spec: &GeneratorSpec, level: usize) -> Result<ComplexVector, Failure> {
    if level >= spec.dim() {
        return Err(Failure::schema(
            "initial_state.level",
            &format!("level {level} out of range for dimension {}", spec.dim()),
        ));
    }
    let h = spec.hamiltonian(0.0).map_err(Failure::core)?;
    let (_, vecs) = eigh(&h);
    let mut v = vecs.column(level).into_owned();
    // largest component real positive
    let (k, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (k, z)| if z.norm() > best.1 + 1e-12 { (k, z.norm()) } else { best });
    let phase = v[k].conj() / v[k].norm();
    v *= phase;
    v[k] = Complex64::new(v[k].re, 0.0);
    Ok(v)
}
