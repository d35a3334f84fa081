//! One function per subcommand. Each returns its tables and a JSON summary;
//! writing files is left to [`crate::output`].

use qamp_core::export::TimeSeries;
use qamp_core::field::FieldStats;
use qamp_core::noise::{caves_limit, NoiseKernel};
use qamp_core::oracle::{evolve, max_step, safe_dim, DensityMatrix, EvolveOptions, OracleReport};
use qamp_core::phase_space::{quasi_grid, GridHeader, GridSpec, PhaseSpaceGrid};
use qamp_core::thermal::{ThermalState, ThermalTrack, UnitMode};
use qamp_core::{AmplifierParams, InputField};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{CommandKind, Resolved};
use crate::error::{CliError, CliResult};

/// Everything a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub table: Option<TimeSeries>,
    pub grids: Vec<(PhaseSpaceGrid, GridHeader)>,
    pub summary: Value,
    pub report: Option<OracleReport>,
    /// Set when the run failed after producing partial results worth
    /// writing; the caller still exits non-zero.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn table(table: TimeSeries, summary: Value) -> Self {
        Self {
            table: Some(table),
            grids: Vec::new(),
            summary,
            report: None,
            failure: None,
        }
    }
}

pub fn run(r: &Resolved) -> CliResult<Outcome> {
    match r.config.command {
        CommandKind::Gain => gain(r),
        CommandKind::Noise => noise(r),
        CommandKind::Mandel => mandel(r),
        CommandKind::Squeezing => squeezing(r),
        CommandKind::Wigner => wigner(r),
        CommandKind::Thermal => thermal(r),
        CommandKind::Oracle => oracle(r),
    }
}

/// Runs `f` on every cell in parallel, keeping cell order.
fn per_cell<T, F>(r: &Resolved, f: F) -> CliResult<Vec<T>>
where
    T: Send,
    F: Fn(&AmplifierParams) -> CliResult<T> + Sync + Send,
{
    r.cells.par_iter().map(f).collect()
}

fn stack(columns: &[&str], blocks: Vec<Vec<Vec<f64>>>) -> TimeSeries {
    let mut ts = TimeSeries::new(columns.iter().copied());
    for row in blocks.into_iter().flatten() {
        ts.push(row);
    }
    ts
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, qamp_core::export::json_number)
}

fn gain(r: &Resolved) -> CliResult<Outcome> {
    let taus = r.taus();
    let blocks = per_cell(r, |p| {
        taus.iter()
            .map(|&t| Ok(vec![p.a_prime, t, p.gain(t)?, p.gain_factor_w(t)]))
            .collect()
    })?;
    let summary: Vec<Value> = r
        .cells
        .iter()
        .map(|p| {
            let g = p.gain(2.0 * p.tau0).ok();
            json!({ "a_prime": p.a_prime, "gain_at_2tau0": opt(g), "gain_min": opt(p.gain(p.tau0).ok()) })
        })
        .collect();
    Ok(Outcome::table(
        stack(&["a_prime", "tau", "G", "W"], blocks),
        json!({ "cells": summary }),
    ))
}

fn noise(r: &Resolved) -> CliResult<Outcome> {
    let taus = r.taus();
    let input = r.input;
    let blocks = per_cell(r, |p| {
        let k = NoiseKernel::new(*p)?;
        taus.iter()
            .map(|&t| {
                let nr = k.record(t)?;
                Ok(vec![
                    p.a_prime,
                    t,
                    nr.gain,
                    nr.delta,
                    nr.added_noise,
                    nr.gain * input.sym_fluct() + nr.delta,
                    nr.m_width,
                ])
            })
            .collect()
    })?;
    let summary = per_cell(r, |p| {
        let asym = NoiseKernel::new(*p)?.asymptotic_added_noise()?;
        let caves = caves_limit(p.n_medium());
        Ok(json!({
            "a_prime": p.a_prime,
            "asymptotic_added_noise": qamp_core::export::json_number(asym),
            "caves_limit": caves,
            "asymptote_over_caves": qamp_core::export::json_number(asym / caves),
        }))
    })?;
    Ok(Outcome::table(
        stack(
            &["a_prime", "tau", "G", "delta", "added_noise", "sym_fluct", "m"],
            blocks,
        ),
        json!({ "cells": summary }),
    ))
}

fn mandel(r: &Resolved) -> CliResult<Outcome> {
    let taus = r.taus();
    let input = r.input;
    let blocks = per_cell(r, |p| {
        let st = FieldStats::new(*p)?;
        taus.iter()
            .map(|&t| {
                let n = st.mean_photon_number(&input, t)?;
                // 0/0 for the vacuum: reported as NaN
                let q = st.mandel_q(&input, t).unwrap_or(f64::NAN);
                Ok(vec![p.a_prime, t, p.gain(t)?, n, q])
            })
            .collect()
    })?;
    let summary = per_cell(r, |p| {
        let st = FieldStats::new(*p)?;
        let c = st.mandel_crossing(&input, r.tau_end(), r.config.scan.samples)?;
        Ok(json!({
            "a_prime": p.a_prime,
            "tau_q": opt(c.map(|c| c.tau)),
            "gain_at_tau_q": opt(c.map(|c| c.gain)),
        }))
    })?;
    Ok(Outcome::table(
        stack(&["a_prime", "tau", "G", "mean_n", "Q"], blocks),
        json!({ "cells": summary }),
    ))
}

fn squeezing(r: &Resolved) -> CliResult<Outcome> {
    let taus = r.taus();
    let input = r.input;
    let blocks = per_cell(r, |p| {
        let st = FieldStats::new(p.rotating_frame())?;
        taus.iter()
            .map(|&t| {
                let (vu, vv) = st.quadrature_variances(&input, t)?;
                let kept = st.squeezing_retained(&input, t)?.retained;
                Ok(vec![p.a_prime, t, vu, vv, if kept { 1.0 } else { 0.0 }, p.gain(t)?])
            })
            .collect()
    })?;
    let summary = per_cell(r, |p| {
        let st = FieldStats::new(*p)?;
        let c = st.squeezing_loss_time(&input, r.tau_end(), r.config.scan.samples)?;
        Ok(json!({
            "a_prime": p.a_prime,
            "loss_tau": opt(c.map(|c| c.tau)),
            "gain_at_loss": opt(c.map(|c| c.gain)),
        }))
    })?;
    Ok(Outcome::table(
        stack(&["a_prime", "tau", "var_u", "var_v", "retained", "G"], blocks),
        json!({ "cells": summary }),
    ))
}

fn wigner(r: &Resolved) -> CliResult<Outcome> {
    let w = &r.config.wigner;
    let times = w.times.clone().expect("resolved");
    let input = r.input;
    let jobs: Vec<(AmplifierParams, f64)> = r
        .cells
        .iter()
        .flat_map(|p| times.iter().map(move |&t| (*p, t)))
        .collect();
    let grids: Vec<(PhaseSpaceGrid, GridHeader)> = jobs
        .par_iter()
        .map(|(p, t)| {
            let spec = match w.half_width {
                Some(h) => {
                    let center = FieldStats::new(*p)?.mean_amplitude(&input, *t)?;
                    Some(GridSpec::square(center, h, w.points))
                }
                None => None,
            };
            let mut g = quasi_grid(p, &input, *t, w.order, spec)?;
            if spec.is_none() && w.points != g.spec.re.points {
                // auto-sized grids use the requested resolution
                let c = grid_center(&g.spec);
                let half = 0.5 * (g.spec.re.max - g.spec.re.min);
                g = quasi_grid(p, &input, *t, w.order, Some(GridSpec::square(c, half, w.points)))?;
            }
            let header = g.header(p, &input);
            Ok((g, header))
        })
        .collect::<CliResult<_>>()?;
    let summary: Vec<Value> = grids
        .iter()
        .map(|(g, h)| {
            json!({
                "a_prime": h.params.a_prime,
                "tau": h.tau,
                "integral": qamp_core::export::json_number(g.integral()),
                "max": qamp_core::export::json_number(g.max_value()),
            })
        })
        .collect();
    Ok(Outcome {
        table: None,
        grids,
        summary: json!({ "grids": summary }),
        report: None,
        failure: None,
    })
}

fn grid_center(spec: &GridSpec) -> num_complex::Complex64 {
    num_complex::Complex64::new(0.5 * (spec.re.min + spec.re.max), 0.5 * (spec.im.min + spec.im.max))
}

fn thermal_state(r: &Resolved) -> CliResult<ThermalState> {
    let InputField::Thermal { nbar } = r.input else {
        return Err(CliError::config("thermal: input must be thermal"));
    };
    Ok(match r.config.params.omega0 {
        Some(w) => ThermalState::kelvin(nbar, w)?,
        None => ThermalState::dimensionless(nbar)?,
    })
}

fn thermal(r: &Resolved) -> CliResult<Outcome> {
    let state = thermal_state(r)?;
    let units = match state.unit_mode {
        UnitMode::Kelvin => "kelvin",
        UnitMode::Dimensionless => "hbar omega0 / k_B",
    };
    if r.config.thermal.slope_table {
        let rows = per_cell(r, |p| {
            let track = ThermalTrack::new(*p, state)?;
            Ok(vec![vec![p.a_prime, track.entropy_slope()?]])
        })?;
        return Ok(Outcome::table(
            stack(&["a_prime", "entropy_slope"], rows),
            json!({ "slope": "[S(14) - S(10)] / 4", "temperature_units": units }),
        ));
    }
    let taus = r.taus();
    let blocks = per_cell(r, |p| {
        let track = ThermalTrack::new(*p, state)?;
        taus.iter()
            .map(|&t| {
                let rec = track.record(t).or_else(|e| match e {
                    // empty mode: the T -> 0 limit
                    qamp_core::Error::TemperatureUndefined => Ok(qamp_core::thermal::ThermalRecord {
                        tau: t,
                        mean_n: 0.0,
                        temperature: 0.0,
                        entropy: 0.0,
                        population_ratio: p.population_ratio(t),
                    }),
                    other => Err(other),
                })?;
                Ok(vec![
                    p.a_prime,
                    t,
                    rec.mean_n,
                    rec.temperature,
                    rec.entropy,
                    rec.population_ratio,
                ])
            })
            .collect()
    })?;
    let summary = per_cell(r, |p| {
        let track = ThermalTrack::new(*p, state)?;
        Ok(json!({
            "a_prime": p.a_prime,
            "entropy_slope": qamp_core::export::json_number(track.entropy_slope()?),
        }))
    })?;
    Ok(Outcome::table(
        stack(&["a_prime", "tau", "mean_n", "T", "S", "N2_over_N1"], blocks),
        json!({ "temperature_units": units, "cells": summary }),
    ))
}

fn oracle(r: &Resolved) -> CliResult<Outcome> {
    let p = r.cells[0];
    let frame = p.rotating_frame();
    let input = r.input;
    let o = &r.config.oracle;
    let tau_end = r.tau_end();
    let stats = FieldStats::new(frame)?;
    let dim = match o.dim {
        Some(d) => d,
        None => {
            let mut peak: f64 = 0.0;
            for i in 0..=200 {
                peak = peak.max(stats.mean_photon_number(&input, tau_end * i as f64 / 200.0)?);
            }
            safe_dim(peak, o.leakage_threshold)
        }
    };
    let step = o.step.unwrap_or_else(|| max_step(&p));
    let steps = qamp_core::rk4::step_count(tau_end, step);
    let every = (steps / (r.config.tau.samples - 1)).max(1);
    let opts = EvolveOptions::new(tau_end, step)
        .sample_every(every)
        .leakage(o.leakage_threshold, o.leakage_policy);
    let rho0 = DensityMatrix::from_input(&input, dim)?;
    let (evo, failure) = match evolve(&rho0, &frame, &opts) {
        Ok(evo) => (evo, None),
        Err(e) => match e.partial() {
            Some(partial) => (partial.clone(), Some(CliError::from(e))),
            None => return Err(e.into()),
        },
    };
    let report = OracleReport::build(&frame, &input, dim, &opts, &evo)?;
    let mut ts = TimeSeries::new([
        "tau",
        "trace_drift",
        "leakage",
        "mean_a_re",
        "mean_a_im",
        "mean_n",
        "sym_fluct",
        "var_u",
        "var_v",
        "Q",
        "d_mean_a",
        "d_mean_n",
        "d_sym_fluct",
    ]);
    for (s, d) in report.moments.iter().zip(&report.analytic_deltas) {
        let m = &s.moments;
        ts.push(vec![
            s.tau,
            s.trace_drift,
            s.leakage,
            m.mean_a.re,
            m.mean_a.im,
            m.mean_n,
            m.sym_fluct,
            m.var_u,
            m.var_v,
            m.mandel_q.unwrap_or(f64::NAN),
            d.mean_a,
            d.mean_n,
            d.sym_fluct,
        ]);
    }
    let summary = json!({
        "dim": dim,
        "step": step,
        "max_trace_drift": report.max_trace_drift,
        "max_leakage": report.max_leakage,
        "truncation_unsafe": report.truncation_unsafe,
        "max_deviation": report.max_deviation(),
        "completed": failure.is_none(),
    });
    Ok(Outcome {
        table: Some(ts),
        grids: Vec::new(),
        summary,
        report: Some(report),
        failure,
    })
}
