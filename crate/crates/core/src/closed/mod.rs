//! Closed-system dynamics and adiabaticity analysis.

mod dynamics;
mod estimate;
mod track;
mod wu;

pub use dynamics::{
    adiabatic_state, berry_phase, berry_phase_curve, coefficient_dynamics, dynamical_phase, fidelity,
    integrate_schrodinger, BerryPhase, CoefficientTrajectory,
};
pub use estimate::{
    adiabatic_condition_ratio, derivative_matrix_elements, min_time_estimate, min_time_estimate_weighted,
    ClosedTimeEstimate, ConditionRatios, LevelEstimate, PairRatio,
};
pub use track::{track_spectrum, SpectralTrack};
pub use wu::{exact_interaction_propagator, wu_expansion, wu_expansion_on_track, WuExpansion, MAX_ORDER};
