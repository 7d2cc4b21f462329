//! CSV and JSON writers. Numbers use Rust's shortest round-trip formatting,
//! `.` as decimal separator and LF line endings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::closed::SpectralTrack;
use crate::error::{Error, Result};
use crate::schedules::SystemKind;
use crate::trajectory::Trajectory;

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Columns `s,t`, optionally `E0,E1,…`, then real and imaginary parts of every
/// state component (`re_psi0,im_psi0,…` or `re_rho00,im_rho00,…`).
pub fn trajectory_csv(traj: &Trajectory, track: Option<&SpectralTrack>) -> Result<String> {
    if let Some(t) = track {
        if t.len() != traj.grid.len() {
            return Err(Error::Shape("spectral track and trajectory use different grids".into()));
        }
    }
    let n = traj.states.first().map_or(0, |v| v.len());
    let mut out = String::from("s,t");
    if let Some(t) = track {
        for k in 0..t.levels() {
            let _ = write!(out, ",E{k}");
        }
    }
    match traj.kind {
        SystemKind::Closed => {
            for k in 0..n {
                let _ = write!(out, ",re_psi{k},im_psi{k}");
            }
        }
        SystemKind::Open => {
            let d = (n as f64).sqrt().round() as usize;
            for k in 0..n {
                let (a, b) = (k / d, k % d);
                let _ = write!(out, ",re_rho{a}{b},im_rho{a}{b}");
            }
        }
    }
    out.push('\n');
    for (i, state) in traj.states.iter().enumerate() {
        let _ = write!(out, "{},{}", num(traj.grid[i]), num(traj.times[i]));
        if let Some(t) = track {
            for e in t.energies_at(i) {
                let _ = write!(out, ",{}", num(*e));
            }
        }
        for z in state.iter() {
            let _ = write!(out, ",{},{}", num(z.re), num(z.im));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Pretty JSON with keys in declaration order.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Input(format!("serialization failed: {e}")))
}
