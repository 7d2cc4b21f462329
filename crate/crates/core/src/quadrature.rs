//! Composite trapezoid rules and finite-difference stencils on arbitrary grids.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Running trapezoid integral, starting at 0.
pub fn cumulative_trapezoid<T>(grid: &[f64], values: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    assert_eq!(grid.len(), values.len(), "grid and samples differ in length");
    let mut out = Vec::with_capacity(values.len());
    if values.is_empty() {
        return out;
    }
    let mut acc = values[0] * 0.0;
    out.push(acc);
    for i in 1..values.len() {
        let h = grid[i] - grid[i - 1];
        acc = acc + (values[i - 1] + values[i]) * (0.5 * h);
        out.push(acc);
    }
    out
}

pub fn trapezoid<T>(grid: &[f64], values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    *cumulative_trapezoid(grid, values).last().expect("empty grid")
}

/// Second-order weights `(index, weight)` for the first derivative at
/// `grid[i]`: central in the interior, one-sided at the ends.
pub fn derivative_stencil(grid: &[f64], i: usize) -> [(usize, f64); 3] {
    let n = grid.len();
    assert!(n >= 3, "derivative stencil needs three points");
    let (a, b, c, at) = if i == 0 {
        (0, 1, 2, 0)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1, 2)
    } else {
        (i - 1, i, i + 1, 1)
    };
    let x = [grid[a], grid[b], grid[c]];
    let x0 = x[at];
    // Derivatives of the Lagrange basis polynomials at x0.
    let mut w = [0.0; 3];
    for k in 0..3 {
        let mut sum = 0.0;
        for m in 0..3 {
            if m == k {
                continue;
            }
            let mut term = 1.0 / (x[k] - x[m]);
            for l in 0..3 {
                if l != k && l != m {
                    term *= (x0 - x[l]) / (x[k] - x[l]);
                }
            }
            sum += term;
        }
        w[k] = sum;
    }
    [(a, w[0]), (b, w[1]), (c, w[2])]
}

/// Index of the grid point equal to `s` (within 1e-12).
pub fn grid_index(grid: &[f64], s: f64) -> Result<usize> {
    grid.iter()
        .position(|&x| (x - s).abs() <= 1e-12)
        .ok_or_else(|| Error::Input(format!("s = {s} is not a grid point")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_exact_for_linear() {
        let grid = [0.0, 0.1, 0.5, 1.0];
        let v: Vec<f64> = grid.iter().map(|x| 3.0 * x + 1.0).collect();
        let cum = cumulative_trapezoid(&grid, &v);
        for (x, c) in grid.iter().zip(&cum) {
            assert!((c - (1.5 * x * x + x)).abs() < 1e-15);
        }
    }

    #[test]
    fn stencil_exact_for_quadratics() {
        let grid = [0.0, 0.2, 0.35, 0.7, 1.0];
        let f = |x: f64| 2.0 * x * x - x + 0.5;
        for i in 0..grid.len() {
            let d: f64 = derivative_stencil(&grid, i).iter().map(|&(k, w)| w * f(grid[k])).sum();
            assert!((d - (4.0 * grid[i] - 1.0)).abs() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn grid_lookup() {
        let grid = [0.0, 0.5, 1.0];
        assert_eq!(grid_index(&grid, 0.5).unwrap(), 1);
        assert!(grid_index(&grid, 0.3).is_err());
    }
}
