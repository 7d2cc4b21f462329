use adiabat_core::ode::Tolerances;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "adiabat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Versioned JSON document; keys in declaration order, nested maps sorted.
#[derive(Serialize)]
pub struct Report<'a> {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub scenario_name: Option<&'a str>,
    pub scenario_sha256: String,
    pub tolerances: Tolerances,
    pub gap_floor: f64,
    pub grid_points: usize,
    pub total_time: Option<f64>,
    pub results: &'a Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl<'a> Report<'a> {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}
