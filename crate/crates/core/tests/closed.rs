use std::f64::consts::PI;
use std::num::NonZeroUsize;

use adiabat_core::closed::*;
use adiabat_core::numkit::{c, expm, serde_matrix::to_rows, sigma_x, sigma_z, ComplexMatrix, ComplexVector};
use adiabat_core::ode::Tolerances;
use adiabat_core::schedules::{make_model, uniform_grid, GeneratorSpec, Term};
use adiabat_core::Error;
use gauss_quad::GaussLegendre;
use proptest::prelude::*;
use serde_json::json;

fn tight() -> Tolerances {
    Tolerances::new(1e-12, 1e-10).unwrap()
}

fn lz() -> GeneratorSpec {
    make_model("landau_zener", &json!({"a": 1.0, "delta": 0.25})).unwrap()
}

fn hermitian(entries: &[f64], d: usize) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        h[(i, i)] = c(entries[k], 0.0);
        k += 1;
        for j in i + 1..d {
            h[(i, j)] = c(entries[k], entries[k + 1]);
            h[(j, i)] = c(entries[k], -entries[k + 1]);
            k += 2;
        }
    }
    h
}

fn interp(h0: &ComplexMatrix, h1: &ComplexMatrix) -> GeneratorSpec {
    make_model("linear_interp", &json!({"h0": to_rows(h0), "h1": to_rows(h1)})).unwrap()
}

#[test]
fn landau_zener_energies_and_gap() {
    let grid = uniform_grid(101).unwrap();
    let track = track_spectrum(&lz(), &grid, 1e-10).unwrap();
    for (i, &s) in grid.iter().enumerate() {
        let e = ((2.0 * s - 1.0).powi(2) + 0.0625).sqrt();
        assert!((track.energy(i, 0) + e).abs() < 1e-12);
        assert!((track.energy(i, 1) - e).abs() < 1e-12);
    }
    assert!((track.min_gap() - 0.5).abs() < 1e-12);
}

#[test]
fn crossing_without_coupling_is_reported_at_midpoint() {
    let spec = make_model("landau_zener", &json!({"a": 1.0, "delta": 0.0})).unwrap();
    match track_spectrum(&spec, &uniform_grid(101).unwrap(), 1e-10) {
        Err(Error::Degenerate { s, pair, .. }) => {
            assert!((s - 0.5).abs() < 1e-12);
            assert_eq!(pair, (0, 1));
        }
        other => panic!("expected a crossing, got {other:?}"),
    }
}

#[test]
fn landau_zener_condition_ratio_at_t_est() {
    let track = track_spectrum(&lz(), &uniform_grid(201).unwrap(), 1e-10).unwrap();
    let r = adiabatic_condition_ratio(&track, &lz(), 8.0).unwrap();
    assert!((r.pairs[0].max_rate - 0.5).abs() < 1e-10);
    assert!((r.max_ratio - 1.0).abs() < 1e-10);
    let r2 = adiabatic_condition_ratio(&track, &lz(), 16.0).unwrap();
    assert!((r2.max_ratio - 0.5 * r.max_ratio).abs() < 1e-12);
}

#[test]
fn static_evolution_matches_expm() {
    let h = sigma_x() * c(0.7, 0.0) + sigma_z() * c(-0.2, 0.0);
    let spec = GeneratorSpec::closed(2, vec![Term::constant(h.clone())]).unwrap();
    let psi0 = ComplexVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let grid = uniform_grid(21).unwrap();
    let t = 13.0;
    let traj = integrate_schrodinger(&spec, t, &psi0, &grid, &tight()).unwrap();
    let exact = expm(&(h * c(0.0, -t))).unwrap() * &psi0;
    assert!((traj.last() - exact).norm() < 1e-8);
    assert!(traj.norm_drift() < 1e-9);
}

#[test]
fn slow_landau_zener_stays_adiabatic() {
    let grid = uniform_grid(401).unwrap();
    let track = track_spectrum(&lz(), &grid, 1e-10).unwrap();
    let traj = integrate_schrodinger(&lz(), 400.0, &track.vector(0, 0), &grid, &tight()).unwrap();
    assert!(track.vector(grid.len() - 1, 0).dotc(traj.last()).norm_sqr() >= 0.999);
    let traj = integrate_schrodinger(&lz(), 800.0, &track.vector(0, 0), &grid, &tight()).unwrap();
    let ad = adiabatic_state(&track, 800.0, 1.0, 0).unwrap();
    assert!(fidelity(&ad, traj.last()).unwrap() >= 0.9999);
}

#[test]
fn time_estimate_scales_inversely_with_energy() {
    let grid = uniform_grid(201).unwrap();
    let base = min_time_estimate(&track_spectrum(&lz(), &grid, 1e-10).unwrap(), &lz(), 0).unwrap();
    assert!((base.t_est - 8.0).abs() < 1e-9);
    let scaled = make_model("landau_zener", &json!({"a": 3.0, "delta": 0.75})).unwrap();
    let est = min_time_estimate(&track_spectrum(&scaled, &grid, 1e-10).unwrap(), &scaled, 0).unwrap();
    assert!((est.f - 3.0 * base.f).abs() < 1e-9);
    assert!((est.g - 3.0 * base.g).abs() < 1e-9);
    assert!((est.t_est - base.t_est / 3.0).abs() < 1e-9);
}

#[test]
fn berry_phase_converges_under_refinement() {
    let spec = make_model("rotating_field", &json!({"b": 1.0, "theta": PI / 2.0})).unwrap();
    let coarse = berry_phase(&track_spectrum(&spec, &uniform_grid(1025).unwrap(), 1e-10).unwrap(), 0, 1.0).unwrap();
    let fine = berry_phase(&track_spectrum(&spec, &uniform_grid(2049).unwrap(), 1e-10).unwrap(), 0, 1.0).unwrap();
    assert!((coarse.phase + PI).abs() < 1e-3);
    assert!((coarse.phase - fine.phase).abs() <= 1e-6);
}

/// `U⁽¹⁾_mn(s) = −∫₀ˢ ⟨m|dn/ds′⟩ e^{iTΦ_mn(s′)} ds′` for the real-gauge
/// Landau–Zener eigenvectors, `Φ_mn = ∫(E_m − E_n)`.
fn lz_first_order(m: usize, t: f64, s: f64) -> num_complex::Complex64 {
    let (a, delta) = (1.0f64, 0.25f64);
    let quad = GaussLegendre::new(NonZeroUsize::new(30).unwrap());
    let energy = |x: f64| ((a * (2.0 * x - 1.0)).powi(2) + delta * delta).sqrt();
    let conn = |x: f64| {
        let eps = a * (2.0 * x - 1.0);
        let half = -a * delta / (eps * eps + delta * delta);
        if m == 0 {
            half
        } else {
            -half
        }
    };
    let panels = 60;
    let phi = |x: f64| {
        // inner integral of the gap by its own quadrature
        let mut acc = 0.0;
        for k in 0..panels {
            let (lo, hi) = (x * k as f64 / panels as f64, x * (k + 1) as f64 / panels as f64);
            acc += quad.integrate(lo, hi, |y| 2.0 * energy(y));
        }
        if m == 0 {
            -acc
        } else {
            acc
        }
    };
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..panels {
        let (lo, hi) = (s * k as f64 / panels as f64, s * (k + 1) as f64 / panels as f64);
        re += quad.integrate(lo, hi, |x| -conn(x) * (t * phi(x)).cos());
        im += quad.integrate(lo, hi, |x| -conn(x) * (t * phi(x)).sin());
    }
    c(re, im)
}

#[test]
fn wu_first_order_matches_double_quadrature() {
    let grid = uniform_grid(16001).unwrap();
    let track = track_spectrum(&lz(), &grid, 1e-10).unwrap();
    let wu = wu_expansion_on_track(&track, &lz(), 20.0, 1).unwrap();
    let idx = 4800;
    assert_eq!(grid[idx], 0.3);
    // real eigenvectors; align the analytic signs with the track
    let half = 0.5 * 0.25f64.atan2(-1.0);
    let analytic = [[-half.sin(), half.cos()], [half.cos(), half.sin()]];
    let sign: Vec<f64> = (0..2)
        .map(|n| (track.vector(0, n)[0].re * analytic[n][0] + track.vector(0, n)[1].re * analytic[n][1]).signum())
        .collect();
    for (m, n) in [(0, 1), (1, 0)] {
        let want = lz_first_order(m, 20.0, 0.3) * sign[m] * sign[n];
        let got = wu.terms[1][idx][(m, n)];
        assert!((got - want).norm() < 1e-6, "U1[{m}{n}] = {got}, oracle {want}");
    }
}

#[test]
fn wu_series_rejects_unresolved_oscillations() {
    match wu_expansion(&lz(), 1e4, 1, &uniform_grid(101).unwrap()) {
        Err(Error::Resolution(_)) => {}
        other => panic!("expected a resolution error, got {other:?}"),
    }
}

#[test]
fn coefficient_dynamics_preserves_norm() {
    let grid = uniform_grid(101).unwrap();
    let a0 = ComplexVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
    let traj = coefficient_dynamics(&lz(), 40.0, &a0, &grid, &tight()).unwrap();
    for a in &traj.coefficients {
        assert!((a.norm_squared() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tracked_vectors_are_eigenvectors(
        e0 in proptest::collection::vec(-1.0f64..1.0, 9),
        e1 in proptest::collection::vec(-1.0f64..1.0, 9),
    ) {
        let (h0, h1) = (hermitian(&e0, 3), hermitian(&e1, 3));
        let spec = interp(&h0, &h1);
        let grid = uniform_grid(81).unwrap();
        let track = match track_spectrum(&spec, &grid, 1e-6) {
            Ok(t) => t,
            Err(Error::Crossing { .. } | Error::Degenerate { .. } | Error::Resolution(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for (i, &s) in grid.iter().enumerate() {
            let h = spec.hamiltonian(s).unwrap();
            for n in 0..3 {
                let v = track.vector(i, n);
                let r = (&h * &v - &v * c(track.energy(i, n), 0.0)).norm();
                prop_assert!(r <= 1e-10 * h.norm().max(1.0));
            }
        }
    }

    #[test]
    fn gauge_changes_leave_observables_alone(
        e0 in proptest::collection::vec(-1.0f64..1.0, 4),
        e1 in proptest::collection::vec(-1.0f64..1.0, 4),
        phase in 0.0f64..(2.0 * PI),
    ) {
        let (h0, h1) = (hermitian(&e0, 2), hermitian(&e1, 2));
        let spec = interp(&h0, &h1);
        let grid = uniform_grid(101).unwrap();
        let track = match track_spectrum(&spec, &grid, 1e-3) {
            Ok(t) => t,
            Err(Error::Crossing { .. } | Error::Degenerate { .. } | Error::Resolution(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let other = track.rephased(0, phase);
        let a = adiabatic_condition_ratio(&track, &spec, 5.0).unwrap();
        let b = adiabatic_condition_ratio(&other, &spec, 5.0).unwrap();
        prop_assert!((a.max_ratio - b.max_ratio).abs() <= 1e-10 * a.max_ratio.max(1.0));
        let ta = min_time_estimate(&track, &spec, 0).unwrap();
        let tb = min_time_estimate(&other, &spec, 0).unwrap();
        prop_assert!((ta.t_est - tb.t_est).abs() <= 1e-10 * ta.t_est.max(1.0));
        let exact = integrate_schrodinger(&spec, 5.0, &track.vector(0, 0), &grid, &Tolerances::default()).unwrap();
        let fa = fidelity(&adiabatic_state(&track, 5.0, 1.0, 0).unwrap(), &exact.last().normalize()).unwrap();
        let fb = fidelity(&adiabatic_state(&other, 5.0, 1.0, 0).unwrap(), &exact.last().normalize()).unwrap();
        prop_assert!((fa - fb).abs() <= 1e-10);
    }

    #[test]
    fn schrodinger_keeps_the_norm(
        e0 in proptest::collection::vec(-1.0f64..1.0, 4),
        e1 in proptest::collection::vec(-1.0f64..1.0, 4),
        t in 1.0f64..30.0,
    ) {
        let spec = interp(&hermitian(&e0, 2), &hermitian(&e1, 2));
        let psi0 = ComplexVector::from_vec(vec![c(0.8, 0.0), c(0.0, 0.6)]);
        let traj = integrate_schrodinger(&spec, t, &psi0, &uniform_grid(11).unwrap(), &tight()).unwrap();
        prop_assert!(traj.norm_drift() < 1e-9);
    }
}
