use std::fmt::Write as _;

use adiabat_core::closed::{
    adiabatic_condition_ratio, adiabatic_state, exact_interaction_propagator, fidelity, integrate_schrodinger,
    min_time_estimate, track_spectrum, wu_expansion_on_track, SpectralTrack,
};
use adiabat_core::consistency::consistency_report;
use adiabat_core::export::{num, trajectory_csv};
use adiabat_core::numkit::serde_matrix::{to_rows, vector::to_pairs};
use adiabat_core::numkit::devectorize;
use adiabat_core::open::{
    classify_regime_from_derivatives, density_diagnostics, expand_jordan_coefficients, generator_derivatives,
    integrate_master, jordan_track, open_condition_metric_from_derivatives, open_time_condition_from_derivatives,
    JordanTrack, JordanTrackOptions, TimeConditionOptions,
};
use adiabat_core::schedules::GeneratorSpec;
use adiabat_core::{Error, SystemKind};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::scenario::{InitialState, Scenario};

/// A CSV table plus the `results` section of the JSON report.
pub struct Output {
    pub csv: String,
    pub results: Value,
}

/// Run parameters after command-line overrides.
pub struct Settings {
    pub scenario: Scenario,
    pub spec: GeneratorSpec,
    pub grid: Vec<f64>,
    pub order: usize,
    pub sweep: Vec<f64>,
}

impl Settings {
    fn total_time(&self) -> Result<f64, Failure> {
        self.scenario.total_time()
    }

    fn closed_only(&self, command: &str) -> Result<(), Failure> {
        if self.spec.kind() == SystemKind::Open {
            return Err(Failure::schema("model", &format!("{command} needs a closed system")));
        }
        Ok(())
    }

    fn track(&self) -> Result<SpectralTrack, Failure> {
        Ok(track_spectrum(&self.spec, &self.grid, self.scenario.gap_floor)?)
    }

    fn jordan(&self) -> Result<JordanTrack, Failure> {
        Ok(jordan_track(&self.spec.to_open(), &self.grid, &JordanTrackOptions::default())?)
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

pub fn spectrum(st: &Settings) -> Result<Output, Failure> {
    if st.spec.kind() == SystemKind::Open {
        let jt = st.jordan()?;
        let mut csv = String::from("s");
        for a in 0..jt.blocks() {
            let _ = write!(csv, ",re_lambda{a},im_lambda{a}");
        }
        csv.push('\n');
        for (i, s) in jt.grid().iter().enumerate() {
            let _ = write!(csv, "{}", num(*s));
            for a in 0..jt.blocks() {
                let z = jt.eigenvalue(i, a);
                let _ = write!(csv, ",{},{}", num(z.re), num(z.im));
            }
            csv.push('\n');
        }
        let results = json!({
            "kind": "open",
            "block_sizes": jt.block_sizes(),
            "eigenvalues": (0..jt.blocks())
                .map(|a| jt.eigenvalue_curve(a).iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        });
        return Ok(Output { csv, results });
    }
    let track = st.track()?;
    let d = track.levels();
    let mut csv = String::from("s");
    for n in 0..d {
        let _ = write!(csv, ",E{n}");
    }
    csv.push_str(",min_gap\n");
    for (i, s) in track.grid().iter().enumerate() {
        let _ = write!(csv, "{}", num(*s));
        for e in track.energies_at(i) {
            let _ = write!(csv, ",{}", num(*e));
        }
        let gap = (1..d).map(|n| track.gap(i, n, n - 1).abs()).fold(f64::INFINITY, f64::min);
        let _ = writeln!(csv, ",{}", num(gap));
    }
    let results = json!({
        "kind": "closed",
        "levels": d,
        "min_gap": track.min_gap(),
        "energies": (0..d).map(|n| track.energies(n)).collect::<Vec<_>>(),
    });
    Ok(Output { csv, results })
}

pub fn evolve(st: &Settings) -> Result<Output, Failure> {
    let t = st.total_time()?;
    let tol = st.scenario.tolerances;
    if st.spec.kind() == SystemKind::Open {
        let rho0 = st.scenario.initial_density(&st.spec)?;
        let traj = integrate_master(&st.spec, t, &rho0, &st.grid, &tol)?;
        let diagnostics = density_diagnostics(&traj)?;
        let last = devectorize(&traj.last().clone().into(), st.spec.dim())?;
        let results = json!({
            "total_time": t,
            "diagnostics": diagnostics,
            "final_density": to_rows(&last),
            "stats": traj.stats,
        });
        return Ok(Output {
            csv: trajectory_csv(&traj, None)?,
            results,
        });
    }
    let track = st.track()?;
    let psi0 = st.scenario.initial_vector(&st.spec)?;
    let traj = integrate_schrodinger(&st.spec, t, &psi0, &st.grid, &tol)?;
    let mut results = json!({
        "total_time": t,
        "norm_drift": traj.norm_drift(),
        "final_state": to_pairs(traj.last()),
        "stats": traj.stats,
    });
    if let None | Some(InitialState::Level { .. }) = st.scenario.initial_state {
        let level = match st.scenario.initial_state {
            Some(InitialState::Level { level }) => level,
            _ => st.scenario.level,
        };
        let ad = adiabatic_state(&track, t, 1.0, level)?;
        results["adiabatic_fidelity"] = json!(fidelity(&ad, &traj.last().normalize())?);
    }
    Ok(Output {
        csv: trajectory_csv(&traj, Some(&track))?,
        results,
    })
}

pub fn check(st: &Settings) -> Result<Output, Failure> {
    let t = st.total_time()?;
    if st.spec.kind() == SystemKind::Open {
        let jt = st.jordan()?;
        let derivs = generator_derivatives(&jt, &st.spec)?;
        let rho0 = st.scenario.initial_density(&st.spec)?;
        let traj = integrate_master(&st.spec, t, &rho0, &st.grid, &st.scenario.tolerances)?;
        let coeffs = expand_jordan_coefficients(&traj, &jt, t)?;
        let metric = open_condition_metric_from_derivatives(&jt, &derivs)?;
        let regimes = classify_regime_from_derivatives(&jt, &derivs, &coeffs)?;
        let time = open_time_condition_from_derivatives(
            &jt,
            &derivs,
            std::slice::from_ref(&coeffs),
            &[t],
            &TimeConditionOptions::default(),
        )?;
        let mut csv = String::from("alpha,beta,regime,max_re_omega,min_re_omega,im_omega_variation,max_v\n");
        for r in &regimes {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                r.alpha,
                r.beta,
                r.regime.label(),
                num(r.max_re_omega),
                num(r.min_re_omega),
                num(r.im_omega_variation),
                num(r.max_v)
            );
        }
        let results = json!({
            "kind": "open",
            "total_time": t,
            "block_sizes": jt.block_sizes(),
            "condition": metric,
            "regimes": regimes,
            "time_condition": {
                "margin": time.margin,
                "satisfied": time.satisfied[0],
                "coefficients": time.coefficients,
            },
        });
        return Ok(Output { csv, results });
    }
    let track = st.track()?;
    let ratios = adiabatic_condition_ratio(&track, &st.spec, t)?;
    let estimate = min_time_estimate(&track, &st.spec, st.scenario.level)?;
    let mut csv = String::from("n,k,max_rate,min_gap,ratio\n");
    for p in &ratios.pairs {
        let _ = writeln!(csv, "{},{},{},{},{}", p.n, p.k, num(p.max_rate), num(p.min_gap), num(p.ratio));
    }
    let results = json!({
        "kind": "closed",
        "total_time": t,
        "max_ratio": ratios.max_ratio,
        "pairs": ratios.pairs,
        "time_estimate": {"f": estimate.f, "g": estimate.g, "t_est": estimate.t_est},
        "time_bound_satisfied": t >= estimate.t_est,
    });
    Ok(Output { csv, results })
}

struct SweepRow {
    t: f64,
    infidelity: f64,
    ratio: f64,
    satisfied: bool,
    trace_drift: Option<f64>,
}

pub fn sweep(st: &Settings) -> Result<Output, Failure> {
    if st.sweep.is_empty() {
        return Err(Failure::schema("sweep", "no T values (give a sweep section or --t-min/--t-max/--points)"));
    }
    let rows = if st.spec.kind() == SystemKind::Open {
        open_sweep(st)?
    } else {
        closed_sweep(st)?
    };
    let open = st.spec.kind() == SystemKind::Open;
    let mut csv = String::from("T,infidelity,ratio,satisfied");
    if open {
        csv.push_str(",trace_drift");
    }
    csv.push('\n');
    for r in &rows {
        let _ = write!(csv, "{},{},{},{}", num(r.t), num(r.infidelity), num(r.ratio), r.satisfied);
        if let Some(d) = r.trace_drift {
            let _ = write!(csv, ",{}", num(d));
        }
        csv.push('\n');
    }
    let results = json!({
        "kind": if open { "open" } else { "closed" },
        "rows": rows
            .iter()
            .map(|r| {
                let mut row = json!({"T": r.t, "infidelity": r.infidelity, "ratio": r.ratio, "satisfied": r.satisfied});
                if let Some(d) = r.trace_drift {
                    row["trace_drift"] = json!(d);
                }
                row
            })
            .collect::<Vec<_>>(),
    });
    Ok(Output { csv, results })
}

fn closed_sweep(st: &Settings) -> Result<Vec<SweepRow>, Failure> {
    let track = st.track()?;
    let level = st.scenario.level;
    if level >= track.levels() {
        return Err(Failure::schema("level", "out of range"));
    }
    let estimate = min_time_estimate(&track, &st.spec, level)?;
    let psi0 = track.vector(0, level);
    st.sweep
        .par_iter()
        .map(|&t| -> Result<SweepRow, Error> {
            let traj = integrate_schrodinger(&st.spec, t, &psi0, &st.grid, &st.scenario.tolerances)?;
            let ad = adiabatic_state(&track, t, 1.0, level)?;
            Ok(SweepRow {
                t,
                infidelity: 1.0 - fidelity(&ad, &traj.last().normalize())?,
                ratio: adiabatic_condition_ratio(&track, &st.spec, t)?.max_ratio,
                satisfied: t >= estimate.t_est,
                trace_drift: None,
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::core)
}

fn open_sweep(st: &Settings) -> Result<Vec<SweepRow>, Failure> {
    let jt = st.jordan()?;
    let derivs = generator_derivatives(&jt, &st.spec)?;
    let rho0 = st.scenario.initial_density(&st.spec)?;
    let runs = st
        .sweep
        .par_iter()
        .map(|&t| {
            let traj = integrate_master(&st.spec, t, &rho0, &st.grid, &st.scenario.tolerances)?;
            let drift = density_diagnostics(&traj)?.trace_drift;
            let coeffs = expand_jordan_coefficients(&traj, &jt, t)?;
            Ok((coeffs, drift))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let coeffs: Vec<_> = runs.iter().map(|r| r.0.clone()).collect();
    let cond = open_time_condition_from_derivatives(&jt, &derivs, &coeffs, &st.sweep, &TimeConditionOptions::default())?;
    let last = st.grid.len() - 1;
    Ok(st
        .sweep
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let c = &runs[k].0;
            // largest drift of the slow coefficients over the path
            let mut deviation: f64 = 0.0;
            for (beta, &size) in jt.block_sizes().iter().enumerate() {
                for j in 0..size {
                    deviation = deviation.max((c.get(last, beta, j) - c.get(0, beta, j)).norm() / 2.0);
                }
            }
            let ratio = cond
                .coefficients
                .iter()
                .map(|b| b.bounds[k] / t)
                .fold(0.0, f64::max);
            SweepRow {
                t,
                infidelity: deviation,
                ratio,
                satisfied: cond.satisfied[k],
                trace_drift: Some(runs[k].1),
            }
        })
        .collect())
}

pub fn wu(st: &Settings) -> Result<Output, Failure> {
    st.closed_only("wu")?;
    let t = st.total_time()?;
    let track = st.track()?;
    let expansion = wu_expansion_on_track(&track, &st.spec, t, st.order)?;
    let exact = exact_interaction_propagator(&track, &st.spec, t, &st.scenario.tolerances)?;
    let order = expansion.order;
    let mut csv = String::from("s");
    for n in 0..=order {
        let _ = write!(csv, ",norm_U{n}");
    }
    for n in 0..=order {
        let _ = write!(csv, ",error_{n}");
    }
    csv.push('\n');
    let last = st.grid.len() - 1;
    let mut errors = vec![0.0; order + 1];
    for (i, s) in st.grid.iter().enumerate() {
        let _ = write!(csv, "{}", num(*s));
        for n in 0..=order {
            let _ = write!(csv, ",{}", num(expansion.terms[n][i].norm()));
        }
        for (n, e) in errors.iter_mut().enumerate() {
            let err = (&exact[i] - expansion.partial_sum(n, i)).norm();
            *e = f64::max(*e, err);
            let _ = write!(csv, ",{}", num(err));
        }
        csv.push('\n');
    }
    let results = json!({
        "total_time": t,
        "order": order,
        "term_norms_at_end": (0..=order).map(|n| expansion.terms[n][last].norm()).collect::<Vec<_>>(),
        "max_error": errors,
        "partial_sum_at_end": to_rows(&expansion.partial_sum(order, last)),
        "exact_at_end": to_rows(&exact[last]),
    });
    Ok(Output { csv, results })
}

pub fn jordan(st: &Settings) -> Result<Output, Failure> {
    let jt = st.jordan()?;
    let mut csv = String::from("s");
    for a in 0..jt.blocks() {
        let _ = write!(csv, ",re_lambda{a},im_lambda{a}");
    }
    csv.push_str(",residual,condition\n");
    for (i, s) in jt.grid().iter().enumerate() {
        let _ = write!(csv, "{}", num(*s));
        for a in 0..jt.blocks() {
            let z = jt.eigenvalue(i, a);
            let _ = write!(csv, ",{},{}", num(z.re), num(z.im));
        }
        let _ = writeln!(csv, ",{},{}", num(jt.residuals()[i].max()), num(jt.form(i).condition_number()));
    }
    let (distinct, signature) = jt.signature();
    let results = json!({
        "block_sizes": jt.block_sizes(),
        "distinct_eigenvalues": distinct,
        "signature": signature,
        "max_residual": jt.max_residual(),
        "points": to_value(&jt),
    });
    Ok(Output { csv, results })
}

pub fn consistency(st: &Settings) -> Result<Output, Failure> {
    st.closed_only("consistency")?;
    let t = st.total_time()?;
    let report = consistency_report(&st.spec, t, &st.grid, st.scenario.level, &st.scenario.tolerances)?;
    Ok(Output {
        csv: report.to_csv(),
        results: to_value(&report),
    })
}
