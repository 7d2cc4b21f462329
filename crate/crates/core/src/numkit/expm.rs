//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants (degrees 3, 5, 7, 9, 13).

use super::{ensure_square, identity, ComplexMatrix};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &ComplexMatrix) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scale(m: &ComplexMatrix, x: f64) -> ComplexMatrix {
    m.map(|z| z * x)
}

/// Odd/even parts `(U, V)` of the low-degree approximants.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.nrows();
    let a2 = a * a;
    let mut power = identity(n);
    let mut u = scale(&power, b[1]);
    let mut v = scale(&power, b[0]);
    let mut k = 2;
    while k < b.len() {
        power = &power * &a2;
        v += scale(&power, b[k]);
        u += scale(&power, b[k + 1]);
        k += 2;
    }
    (a * u, v)
}

fn pade13(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let b = &B13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    let u = a
        * (&a6 * inner_u
            + scale(&a6, b[7])
            + scale(&a4, b[5])
            + scale(&a2, b[3])
            + scale(&id, b[1]));
    let inner_v = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    let v = &a6 * inner_v + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&id, b[0]);
    (u, v)
}

/// `exp(M)` for a square complex matrix.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m, "expm argument")?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Input("expm argument has non-finite entries".into()));
    }
    let norm = one_norm(m);
    for &(degree, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match degree {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(m, b);
            return solve_pade(&u, &v);
        }
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = scale(m, 0.5f64.powi(squarings));
    let (u, v) = pade13(&scaled);
    let mut r = solve_pade(&u, &v)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Solves `(V − U) R = V + U`.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Input("Padé denominator is singular".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{c, sigma_x, ComplexVector, I};
    use std::f64::consts::PI;

    #[test]
    fn zero_maps_to_identity() {
        let z = ComplexMatrix::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), identity(3));
    }

    #[test]
    fn pauli_rotation_by_pi() {
        // exp(−iπσx/2) = cos(π/2) − i sin(π/2) σx = −iσx
        let arg = sigma_x() * (-I * (PI / 2.0));
        let expected = sigma_x() * (-I);
        assert!((expm(&arg).unwrap() - expected).camax() < 1e-14);
    }

    #[test]
    fn diagonal_case() {
        let d = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c(1.5, 0.0), c(-3.0, 2.0)]));
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - c(1.5, 0.0).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-3.0, 2.0).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn every_degree_branch_matches_series() {
        // Scaled nilpotent-plus-diagonal matrix with a closed-form exponential:
        // exp([[a, b], [0, a]]) = e^a [[1, b], [0, 1]].
        for &scale_ in &[1e-3, 0.1, 0.5, 1.5, 4.0, 9.0] {
            let a = c(0.3, -0.2) * scale_;
            let b = c(1.0, 0.5) * scale_;
            let m = ComplexMatrix::from_row_slice(2, 2, &[a, b, c(0.0, 0.0), a]);
            let e = expm(&m).unwrap();
            let ea = a.exp();
            let expected = ComplexMatrix::from_row_slice(2, 2, &[ea, ea * b, c(0.0, 0.0), ea]);
            let rel = (e - &expected).camax() / expected.camax();
            assert!(rel < 1e-13, "scale {scale_}: relative error {rel:e}");
        }
    }

    #[test]
    fn agrees_with_nalgebra_exp() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| c((i as f64 - j as f64) * 0.7, (i * j) as f64 * 0.3 - 0.5));
        let ours = expm(&m).unwrap();
        let theirs = m.exp();
        assert!((&ours - &theirs).camax() / theirs.camax() < 1e-12);
    }
}
