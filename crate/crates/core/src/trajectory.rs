use serde::Serialize;

use crate::numkit::{serde_matrix, ComplexVector};
use crate::ode::{IntegratorStats, Tolerances};
use crate::schedules::SystemKind;

/// States sampled on a normalized-time grid.
///
/// Closed systems store state vectors, open systems coherence vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub kind: SystemKind,
    pub total_time: f64,
    pub grid: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(serialize_with = "serialize_states")]
    pub states: Vec<ComplexVector>,
    pub tolerances: Tolerances,
    pub stats: IntegratorStats,
}

fn serialize_states<S: serde::Serializer>(states: &[ComplexVector], ser: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(states.len()))?;
    for s in states {
        seq.serialize_element(&serde_matrix::vector::to_pairs(s))?;
    }
    seq.end()
}

impl Trajectory {
    pub fn last(&self) -> &ComplexVector {
        self.states.last().expect("trajectory is never empty")
    }

    /// `max |‖ψ(s)‖ − 1|`
    pub fn norm_drift(&self) -> f64 {
        self.states.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}
