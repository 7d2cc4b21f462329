//! Open-system dynamics: Lindblad supermatrices, master-equation
//! integration, Jordan tracking of `L(s)` and the Jordan-block adiabaticity
//! conditions.

mod coefficients;
mod conditions;
mod counts;
mod jtrack;
mod master;
mod supermatrix;

pub use coefficients::{expand_jordan_coefficients, JordanCoefficients};
pub use conditions::{
    classify_regime, classify_regime_from_derivatives, generator_derivatives, open_condition_metric,
    open_condition_metric_from_derivatives, open_time_condition, open_time_condition_from_derivatives,
    CoefficientBound, ConditionEntry, OpenCondition, OpenTimeCondition, PairRegime, Regime, TimeConditionOptions,
    VSample,
};
pub use counts::{binomial, condition_term_count, time_term_count};
pub use jtrack::{jordan_track, JordanTrack, JordanTrackOptions};
pub use master::{density_diagnostics, integrate_master, validate_density, DensityDiagnostics};
pub use supermatrix::{
    build_supermatrix, generator_supermatrix, generator_supermatrix_derivative, lindblad_rhs, supermatrix_derivative,
};
