//! Adaptive Dormand–Prince 5(4) integrator for complex vector ODEs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::ComplexVector;

/// Absolute/relative error tolerances for adaptive stepping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs > 0.0) || !(rel >= 0.0) || !abs.is_finite() || !rel.is_finite() {
            return Err(Error::Input(format!(
                "tolerances must be positive and finite, got abs={abs}, rel={rel}"
            )));
        }
        Ok(Tolerances { abs, rel })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub min_step: f64,
    pub max_step: f64,
}

const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dx = f(x, y)` from `grid[0]` and returns `y` at every grid
/// point. Steps never cross a grid point, so outputs are exact step ends.
pub fn integrate<F>(
    mut f: F,
    grid: &[f64],
    y0: &ComplexVector,
    tol: &Tolerances,
) -> Result<(Vec<ComplexVector>, IntegratorStats)>
where
    F: FnMut(f64, &ComplexVector) -> Result<ComplexVector>,
{
    if grid.len() < 2 {
        return Err(Error::Input("output grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("output grid must be strictly increasing".into()));
    }
    let mut stats = IntegratorStats {
        min_step: f64::INFINITY,
        ..IntegratorStats::default()
    };
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.clone());

    let mut x = grid[0];
    let mut y = y0.clone();
    let mut k1 = f(x, &y)?;
    stats.rhs_evaluations += 1;
    let span = grid[grid.len() - 1] - grid[0];
    let mut h = initial_step(&y, &k1, tol, span);
    let mut err_prev: f64 = 1e-4;

    for &target in &grid[1..] {
        while x < target {
            let remaining = target - x;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            if step < MIN_STEP && !last {
                return Err(Error::Stiffness { s: x, h: step });
            }

            let mut k: Vec<ComplexVector> = Vec::with_capacity(7);
            k.push(k1.clone());
            for stage in 1..7 {
                let mut yi = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[stage][j];
                    if a != 0.0 {
                        yi.axpy(Complex64::new(a * step, 0.0), kj, Complex64::new(1.0, 0.0));
                    }
                }
                if stage == 6 {
                    // FSAL: stage 7 evaluates at the proposed solution.
                    let k7 = f(x + step, &yi)?;
                    stats.rhs_evaluations += 1;
                    k.push(k7);
                    let err = error_norm(&y, &yi, &k, step, tol);
                    if err <= 1.0 || step < MIN_STEP {
                        if !err.is_finite() {
                            return Err(Error::Stiffness { s: x, h: step });
                        }
                        x = if last { target } else { x + step };
                        y = yi;
                        k1 = k.pop().unwrap();
                        stats.accepted += 1;
                        stats.min_step = stats.min_step.min(step);
                        stats.max_step = stats.max_step.max(step);
                        let e = err.max(1e-10);
                        let factor = (SAFETY * e.powf(-ALPHA) * err_prev.powf(BETA)).clamp(0.2, 5.0);
                        err_prev = e;
                        if !last || factor < 1.0 {
                            h = step * factor;
                        }
                    } else {
                        stats.rejected += 1;
                        let factor = if err.is_finite() {
                            (SAFETY * err.powf(-ALPHA)).clamp(0.2, 1.0)
                        } else {
                            0.2
                        };
                        h = step * factor;
                        if h < MIN_STEP {
                            return Err(Error::Stiffness { s: x, h });
                        }
                    }
                } else {
                    let ki = f(x + C[stage] * step, &yi)?;
                    stats.rhs_evaluations += 1;
                    k.push(ki);
                }
            }
        }
        out.push(y.clone());
    }
    if !stats.min_step.is_finite() {
        stats.min_step = 0.0;
    }
    Ok((out, stats))
}

fn error_norm(y: &ComplexVector, y_new: &ComplexVector, k: &[ComplexVector], h: f64, tol: &Tolerances) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut e = Complex64::new(0.0, 0.0);
        for (j, kj) in k.iter().enumerate() {
            if E[j] != 0.0 {
                e += kj[i] * E[j];
            }
        }
        e *= h;
        let sc = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
        acc += (e.norm() / sc).powi(2);
    }
    (acc / n.max(1) as f64).sqrt()
}

fn initial_step(y: &ComplexVector, f0: &ComplexVector, tol: &Tolerances, span: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let scale = |i: usize| tol.abs + tol.rel * y[i].norm();
    let d0 = ((0..y.len()).map(|i| (y[i].norm() / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = ((0..y.len()).map(|i| (f0[i].norm() / scale(i)).powi(2)).sum::<f64>() / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).max(MIN_STEP * 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::c;

    #[test]
    fn exponential_decay_and_rotation() {
        let lambda = c(-0.3, 2.0);
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let y0 = ComplexVector::from_vec(vec![c(1.0, 0.0)]);
        let (ys, stats) = integrate(|_, y| Ok(y * lambda), &grid, &y0, &Tolerances::new(1e-12, 1e-10).unwrap()).unwrap();
        for (s, y) in grid.iter().zip(&ys) {
            let exact = (lambda * *s).exp();
            assert!((y[0] - exact).norm() < 1e-9, "s={s}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn tighter_tolerance_is_more_accurate() {
        let grid = [0.0, 3.0];
        let y0 = ComplexVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        // harmonic oscillator as y'' = −y
        let rhs = |_: f64, y: &ComplexVector| Ok(ComplexVector::from_vec(vec![y[1], -y[0]]));
        let err = |tol| {
            let (ys, _) = integrate(rhs, &grid, &y0, &tol).unwrap();
            (ys[1][0] - Complex64::new(3.0_f64.cos(), 0.0)).norm()
        };
        let loose = err(Tolerances::new(1e-6, 1e-6).unwrap());
        let tight = err(Tolerances::new(1e-12, 1e-12).unwrap());
        assert!(tight < loose);
        assert!(tight < 1e-10);
    }

    #[test]
    fn rejects_bad_grids() {
        let y0 = ComplexVector::from_vec(vec![c(1.0, 0.0)]);
        let tol = Tolerances::default();
        assert!(integrate(|_, y| Ok(y.clone()), &[0.0], &y0, &tol).is_err());
        assert!(integrate(|_, y| Ok(y.clone()), &[0.0, 0.0], &y0, &tol).is_err());
    }

    #[test]
    fn blow_up_reports_stiffness() {
        let y0 = ComplexVector::from_vec(vec![c(1.0, 0.0)]);
        let r = integrate(|_, y| Ok(y.map(|z| z * z)), &[0.0, 2.0], &y0, &Tolerances::default());
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
