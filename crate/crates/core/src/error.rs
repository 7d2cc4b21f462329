use thiserror::Error;

use crate::numkit::JordanForm;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("normalized time s = {s} lies outside [0, 1]")]
    Domain { s: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Two instantaneous levels came closer than the gap floor.
    #[error("levels {} and {} are degenerate at s = {s} (gap {gap:.3e})", pair.0, pair.1)]
    Degenerate { s: f64, pair: (usize, usize), gap: f64 },

    /// The Jordan structure of the generator changed along the track.
    #[error("Jordan structure changes near s = {s}: {reason}")]
    Crossing { s: f64, reason: String },

    #[error("insufficient grid resolution: {0}")]
    Resolution(String),

    #[error("step size underflow at s = {s} (h = {h:.3e})")]
    Stiffness { s: f64, h: f64 },

    /// Similarity transform too ill-conditioned; carries the best-effort decomposition.
    #[error("similarity condition number {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned {
        cond: f64,
        cap: f64,
        best_effort: Box<JordanForm>,
    },

    #[error("eigenvalue difference {value:.3e} too small at s = {s}")]
    Conditioning { s: f64, value: f64 },

    #[error("numerical overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Short machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Domain { .. } => "domain",
            Error::Config(_) => "config",
            Error::Input(_) => "input",
            Error::Degenerate { .. } => "degenerate",
            Error::Crossing { .. } => "crossing",
            Error::Resolution(_) => "resolution",
            Error::Stiffness { .. } => "stiffness",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Conditioning { .. } => "conditioning",
            Error::Overflow(_) => "overflow",
        }
    }

    /// True for errors caused by malformed input rather than by the numerics.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Shape(_) | Error::Domain { .. } | Error::Config(_) | Error::Input(_)
        )
    }

    /// The normalized time the error refers to, when there is one.
    pub fn location(&self) -> Option<f64> {
        match self {
            Error::Domain { s }
            | Error::Degenerate { s, .. }
            | Error::Crossing { s, .. }
            | Error::Stiffness { s, .. }
            | Error::Conditioning { s, .. } => Some(*s),
            _ => None,
        }
    }
}
