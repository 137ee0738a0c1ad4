//! Turns a resolved run into CSV tables.

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::coefficients::{derive, PhysicalParams};
use crate::compiler::{compile, reduced_generator};
use crate::dynamics::{fastest_rate, TimeGrid, Trajectory};
use crate::error::Result;
use crate::full::{self, full_equations};
use crate::reduced::{self, optimal_squeezing};

use super::config::{default_models, Kind, Model, RunConfig};
use super::output::{value_label, Cell, Table};
use super::CliError;

/// Golden-section tolerance of the optimal-squeezing search.
pub const R_OPT_TOL: f64 = 1e-4;

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t_s",
    "E_N",
    "dP2_minus",
    "dQ2_minus",
    "theta",
    "n_phonon_1",
    "n_phonon_2",
    "dP2_minus_lab",
    "dQ2_minus_lab",
    "nu_tilde_1",
    "nu_tilde_2",
    "nu_min",
];

/// Tables of a run plus the points that could not be evaluated.
///
/// Failed points still appear in the tables as NaN rows carrying the message.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub failures: Vec<CliError>,
}

pub fn execute(cfg: &RunConfig, pool: &ThreadPool) -> std::result::Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cfg.kind() {
        Kind::Trajectories => trajectories(cfg, pool, &mut out)?,
        Kind::SteadySweep => steady_sweep(cfg, pool, &mut out),
        Kind::OptimalSqueezing => optimal_sweep(cfg, pool, &mut out),
        Kind::Adiabatic => adiabatic_sweep(cfg, pool, &mut out),
    }
    Ok(out)
}

type Row = (Vec<Cell>, Option<CliError>);

fn collect(name: String, header: &[&str], rows: Vec<Row>, out: &mut Outcome) {
    let mut t = Table::new(name, header);
    for (row, failure) in rows {
        t.push(row);
        out.failures.extend(failure);
    }
    out.tables.push(t);
}

fn failed_row(x: Option<f64>, n: usize, e: crate::error::Error, point: String) -> Row {
    let msg = e.to_string();
    let mut row: Vec<Cell> = x.map(Cell::Num).into_iter().collect();
    row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), n));
    row.push(Cell::Text(msg));
    (row, Some(CliError::from_core(e, &point)))
}

fn curve_points(cfg: &RunConfig) -> Vec<Option<f64>> {
    match &cfg.curves {
        Some(a) => a.values.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

fn describe(cfg: &RunConfig, model: Option<Model>, curve: Option<f64>, sweep: Option<f64>) -> String {
    let mut parts = Vec::new();
    if let Some(m) = model {
        parts.push(format!("model {m}"));
    }
    for (axis, v) in [(&cfg.curves, curve), (&cfg.sweep, sweep)] {
        if let (Some(a), Some(v)) = (axis, v) {
            parts.push(format!("{} = {v:e}", a.key.name()));
        }
    }
    if parts.is_empty() {
        parts.push("base parameters".into());
    }
    parts.join(", ")
}

fn stem(cfg: &RunConfig, model: Option<Model>, curve: Option<f64>) -> String {
    let mut s = cfg.scenario.name().to_string();
    if let Some(m) = model {
        s.push('_');
        s.push_str(m.name());
    }
    if let (Some(a), Some(v)) = (&cfg.curves, curve) {
        s.push('_');
        s.push_str(a.key.name());
        s.push_str(&value_label(v));
    }
    s
}

/// Upper bound on the rates a model's integrator must resolve.
pub fn model_rate(model: Model, p: &PhysicalParams, coupling: full::Coupling) -> Result<f64> {
    let coeffs = derive(p)?;
    let carrier = coeffs.modulation_frequency().abs();
    Ok(match model {
        Model::Reduced3 | Model::ReducedAnalytic => fastest_rate(&reduced::build_system(p)?.m3, carrier),
        Model::Reduced10 => {
            let eqs = compile(&reduced_generator(&coeffs, 0.0)?)?;
            2.0 * fastest_rate(&eqs.drift, carrier / 2.0)
        }
        Model::Full6 => {
            let eqs = full_equations(&coeffs, coupling)?;
            2.0 * fastest_rate(&eqs.drift, carrier / 2.0)
        }
    })
}

pub fn trajectory(cfg: &RunConfig, model: Model, p: &PhysicalParams) -> Result<Trajectory> {
    let grid = TimeGrid::resolving(
        0.0,
        cfg.grid.t_end,
        model_rate(model, p, cfg.coupling)?,
        cfg.grid.step_ratio,
        cfg.grid.samples,
    )?;
    match model {
        Model::Reduced3 => reduced::evolve(p, &grid),
        Model::Reduced10 => reduced::evolve_full10(p, &grid),
        Model::ReducedAnalytic => {
            // Same sample times as the integrators, without stepping.
            reduced::evolve_analytic(p, &grid.sample_times())
        }
        Model::Full6 => full::evolve_full(p, &grid, None, cfg.coupling),
    }
}

fn trajectory_table(name: String, tr: &Trajectory) -> Table {
    let mut t = Table::new(name, &TRAJECTORY_COLUMNS);
    for ((time, cov), o) in tr.times.iter().zip(&tr.covariances).zip(&tr.observables) {
        let (nu1, nu2) = o.nu_tilde_from_variances();
        t.push(
            [
                *time,
                o.e_n,
                o.dp2_minus,
                o.dq2_minus,
                o.theta,
                o.phonon[0],
                o.phonon[1],
                o.dp2_minus_lab,
                o.dq2_minus_lab,
                nu1,
                nu2,
                cov.min_symplectic_eigenvalue(),
            ]
            .map(Cell::Num)
            .to_vec(),
        );
    }
    t
}

/// Steady-state summary of one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyRow {
    pub e_n: f64,
    pub dp2_minus: f64,
    pub dq2_minus: f64,
    pub theta: f64,
    pub threshold: f64,
    pub entangled: bool,
    pub nu_min: f64,
}

pub fn steady_row(cfg: &RunConfig, model: Model, p: &PhysicalParams) -> Result<SteadyRow> {
    let phase = cfg.phase.phase();
    let (o, c, nu_min) = match model {
        Model::Reduced3 | Model::ReducedAnalytic => {
            let s = reduced::steady_state(p, phase)?;
            (s.observables, s.criterion, s.covariance.min_symplectic_eigenvalue())
        }
        Model::Reduced10 => {
            let s = reduced::steady_state_moments(p, phase)?;
            (s.observables, s.criterion, s.covariance.min_symplectic_eigenvalue())
        }
        Model::Full6 => {
            let s = full::steady_state_full(p, phase, cfg.coupling)?;
            (s.observables, s.criterion, s.covariance.min_symplectic_eigenvalue())
        }
    };
    Ok(SteadyRow {
        e_n: o.e_n,
        dp2_minus: o.dp2_minus,
        dq2_minus: o.dq2_minus,
        theta: o.theta,
        threshold: c.threshold,
        entangled: c.entangled,
        nu_min,
    })
}

fn trajectories(cfg: &RunConfig, pool: &ThreadPool, out: &mut Outcome) -> std::result::Result<(), CliError> {
    let curves = curve_points(cfg);
    let tasks: Vec<(Model, Option<f64>)> = cfg
        .models
        .iter()
        .flat_map(|&m| curves.iter().map(move |&c| (m, c)))
        .collect();
    let results: Vec<std::result::Result<Table, CliError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(model, curve)| {
                let p = cfg.point(curve, None).to_physical();
                trajectory(cfg, model, &p)
                    .map(|tr| trajectory_table(stem(cfg, Some(model), curve), &tr))
                    .map_err(|e| CliError::from_core(e, &describe(cfg, Some(model), curve, None)))
            })
            .collect()
    });
    out.tables = results.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;

    let key = cfg.curves.as_ref().map(|a| a.key.name());
    let mut header: Vec<&str> = key.into_iter().collect();
    header.extend(["E_N", "dP2_minus", "dQ2_minus", "theta", "threshold", "nu_min", "error"]);
    for &model in &cfg.models {
        let rows: Vec<Row> = pool.install(|| {
            curves
                .par_iter()
                .map(|&curve| {
                    let p = cfg.point(curve, None).to_physical();
                    match steady_row(cfg, model, &p) {
                        Ok(s) => {
                            let mut row: Vec<Cell> = curve.map(Cell::Num).into_iter().collect();
                            row.extend(
                                [s.e_n, s.dp2_minus, s.dq2_minus, s.theta, s.threshold, s.nu_min].map(Cell::Num),
                            );
                            row.push(Cell::Text(String::new()));
                            (row, None)
                        }
                        Err(e) => failed_row(curve, 6, e, describe(cfg, Some(model), curve, None)),
                    }
                })
                .collect()
        });
        collect(
            format!("{}_{}_steady", cfg.scenario.name(), model.name()),
            &header,
            rows,
            out,
        );
    }
    Ok(())
}

fn steady_sweep(cfg: &RunConfig, pool: &ThreadPool, out: &mut Outcome) {
    let sweep = cfg.sweep.as_ref().expect("steady sweep has a sweep axis");
    let key = sweep.key.name();
    let tag_models = cfg.models != default_models(cfg.scenario);
    for &model in &cfg.models {
        for curve in curve_points(cfg) {
            let rows: Vec<(f64, Result<SteadyRow>)> = pool.install(|| {
                sweep
                    .values
                    .par_iter()
                    .map(|&x| (x, steady_row(cfg, model, &cfg.point(curve, Some(x)).to_physical())))
                    .collect()
            });
            let base = stem(cfg, tag_models.then_some(model), curve);
            let mut en = Table::new(format!("{base}_EN"), &[key, "E_N", "nu_min", "error"]);
            let mut dp = Table::new(
                format!("{base}_dP2"),
                &[
                    key,
                    "dP2_minus",
                    "dQ2_minus",
                    "theta",
                    "threshold",
                    "entangled",
                    "error",
                ],
            );
            for (x, row) in rows {
                match row {
                    Ok(s) => {
                        en.push(vec![x.into(), s.e_n.into(), s.nu_min.into(), Cell::Text(String::new())]);
                        dp.push(vec![
                            x.into(),
                            s.dp2_minus.into(),
                            s.dq2_minus.into(),
                            s.theta.into(),
                            s.threshold.into(),
                            f64::from(u8::from(s.entangled)).into(),
                            Cell::Text(String::new()),
                        ]);
                    }
                    Err(e) => {
                        let (row, failure) = failed_row(Some(x), 5, e, describe(cfg, Some(model), curve, Some(x)));
                        let mut short = row[..3].to_vec();
                        short.push(row[6].clone());
                        en.push(short);
                        dp.push(row);
                        out.failures.extend(failure);
                    }
                }
            }
            out.tables.push(en);
            out.tables.push(dp);
        }
    }
}

fn optimal_sweep(cfg: &RunConfig, pool: &ThreadPool, out: &mut Outcome) {
    let sweep = cfg.sweep.as_ref().expect("optimal sweep has a sweep axis");
    let header = [
        sweep.key.name(),
        "r_opt_numeric",
        "r_opt_formula",
        "r_opt_formula_printed",
        "E_N_opt",
        "dP2_opt",
        "at_boundary",
        "error",
    ];
    let rows: Vec<Row> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&x| {
                let p = cfg.point(None, Some(x)).to_physical();
                let point = || -> Result<(reduced::OptimalSqueezing, f64)> {
                    let opt = optimal_squeezing(&p, R_OPT_TOL)?;
                    let mut q = p;
                    q.r = opt.r_numeric;
                    let e_n = reduced::steady_state(&q, cfg.phase.phase())?.observables.e_n;
                    Ok((opt, e_n))
                };
                match point() {
                    Ok((opt, e_n)) => (
                        vec![
                            x.into(),
                            opt.r_numeric.into(),
                            opt.r_formula.unwrap_or(f64::NAN).into(),
                            opt.r_formula_printed.unwrap_or(f64::NAN).into(),
                            e_n.into(),
                            opt.dp2_min.into(),
                            f64::from(u8::from(opt.at_boundary)).into(),
                            Cell::Text(opt.note.unwrap_or_default()),
                        ],
                        None,
                    ),
                    Err(e) => failed_row(Some(x), 6, e, describe(cfg, None, None, Some(x))),
                }
            })
            .collect()
    });
    collect(format!("{}_ropt", cfg.scenario.name()), &header, rows, out);
}

fn adiabatic_sweep(cfg: &RunConfig, pool: &ThreadPool, out: &mut Outcome) {
    let sweep = cfg.sweep.as_ref().expect("adiabatic sweep has a sweep axis");
    let header = [
        sweep.key.name(),
        "dP2_full",
        "dP2_reduced",
        "relative_deviation",
        "E_N_full",
        "E_N_reduced",
        "error",
    ];
    let rows: Vec<Row> = pool.install(|| {
        sweep
            .values
            .par_iter()
            .map(|&x| {
                let p = cfg.point(None, Some(x)).to_physical();
                let pair = steady_row(cfg, Model::Full6, &p)
                    .and_then(|f| steady_row(cfg, Model::Reduced3, &p).map(|r| (f, r)));
                match pair {
                    Ok((f, r)) => (
                        vec![
                            x.into(),
                            f.dp2_minus.into(),
                            r.dp2_minus.into(),
                            ((f.dp2_minus - r.dp2_minus).abs() / r.dp2_minus).into(),
                            f.e_n.into(),
                            r.e_n.into(),
                            Cell::Text(String::new()),
                        ],
                        None,
                    ),
                    Err(e) => failed_row(Some(x), 5, e, describe(cfg, None, None, Some(x))),
                }
            })
            .collect()
    });
    collect(format!("{}_deviation", cfg.scenario.name()), &header, rows, out);
}
