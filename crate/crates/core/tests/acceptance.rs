//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sqzmirror::cli::{self, Overrides, Scenario};
use sqzmirror::coefficients::PhysicalParams;
use sqzmirror::compiler::{annihilation, compile, reduced_generator, GeneratorSpec};
use sqzmirror::dynamics::{fastest_rate, integrate, integrate_raw, TimeGrid, DEFAULT_STEP_RATIO};
use sqzmirror::full::steady_dp2_pair;
use sqzmirror::gaussian::CovarianceMatrix;
use sqzmirror::reduced::{self, build_system, evolve_v3, steady_state, Phase, CRITERION_BAND};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn at_rt(r: f64, t: f64) -> PhysicalParams {
    let mut p = PhysicalParams::baseline();
    p.r = r;
    p.temperature = t;
    p
}

fn criterion_equivalence() -> Outcome {
    let (mut checked, mut in_band, mut bad) = (0, 0, Vec::new());
    for r in linspace(0.0, 2.5, 20) {
        for t in linspace(0.0, 10e-3, 20) {
            for phase in [Phase::PLUS, Phase::MINUS] {
                let rep = steady_state(&at_rt(r, t), phase).map_err(|e| format!("r={r} T={t}: {e}"))?;
                let c = rep.criterion;
                if (c.dp2_minus - c.threshold).abs() < CRITERION_BAND {
                    in_band += 1;
                    continue;
                }
                checked += 1;
                if (c.e_n > 0.0) != (c.dp2_minus < c.threshold) {
                    bad.push(format!("r={r:.3} T={t:.2e}"));
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!("{checked} states agree, {in_band} in band, mismatches {bad:?}"),
    )
}

fn closure() -> Outcome {
    let p = at_rt(1.0, 2.5e-3);
    let sys = build_system(&p).map_err(|e| e.to_string())?;
    let k = &sys.coeffs;
    let eqs = compile(&reduced_generator(k, 0.0).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let rate = fastest_rate(&eqs.drift, p.delta);
    let grid = TimeGrid::resolving(0.0, 20e-6, rate, DEFAULT_STEP_RATIO, 100).map_err(|e| e.to_string())?;
    let ten = integrate(&eqs, &CovarianceMatrix::thermal(2, k.nbar0), &grid).map_err(|e| e.to_string())?;
    let (_, three) = evolve_v3(&sys, &grid).map_err(|e| e.to_string())?;
    let c = k.nbar0 + 0.5;
    let (mut rel, mut dev) = (0.0f64, 0.0f64);
    for (v, y) in ten.covariances.iter().zip(&three) {
        let v = |i: usize, j: usize| v.get(i - 1, j - 1);
        for d in [
            v(1, 1) - v(3, 3),
            v(2, 2) - v(4, 4),
            v(1, 2) - v(3, 4),
            v(1, 4) - v(2, 3),
            v(1, 4) + v(1, 2),
            v(1, 1) + v(1, 3) - c,
            v(2, 2) + v(2, 4) - c,
        ] {
            rel = rel.max(d.abs());
        }
        for (a, b) in [v(1, 1), v(2, 2), v(1, 2)].iter().zip(y) {
            dev = dev.max((a - b).abs());
        }
    }
    check(
        ten.len() >= 100 && rel < 1e-9 && dev < 1e-8,
        format!(
            "{} samples, relations {rel:.1e} (< 1e-9), three-variable match {dev:.1e} (< 1e-8)",
            ten.len()
        ),
    )
}

fn compiled_matrices() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut m_err, mut b_err) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let p = common::random_params(&mut rng);
        let sys = build_system(&p).map_err(|e| e.to_string())?;
        let oracle = common::m3(&sys.coeffs);
        let scale = oracle.amax();
        for (a, b) in sys.m3.iter().zip(oracle.iter()) {
            let d = (a - b).abs();
            m_err = m_err.max(if *b == 0.0 { d / scale } else { d / b.abs() });
        }
        let period = sys.coeffs.period().unwrap_or(1e-8);
        for _ in 0..20 {
            let t = rng.random_range(0.0..3.0 * period);
            let expected = common::b3(&sys.coeffs, t);
            b_err = b_err.max((sys.drive(t) - &expected).amax() / expected.amax());
        }
    }
    check(
        m_err < 1e-10 && b_err < 1e-10,
        format!("drift entrywise {m_err:.1e}, drive decomposition {b_err:.1e} (< 1e-10)"),
    )
}

fn analytic_vs_numeric() -> Outcome {
    let p = at_rt(1.0, 2.5e-3);
    let sys = build_system(&p).map_err(|e| e.to_string())?;
    let aff = sys.affine();
    let y0 = nalgebra::DVector::from_column_slice(&reduced::initial_state(sys.nbar0()));
    let rate = fastest_rate(&aff.matrix, p.delta);
    let rel = |a: &[f64; 3], b: &nalgebra::DVector<f64>| {
        let d = (0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max);
        d / b.amax()
    };

    let grid = TimeGrid::resolving(0.0, 20e-6, rate, 0.005, 50).map_err(|e| e.to_string())?;
    let (times, ys) = evolve_v3(&sys, &grid).map_err(|e| e.to_string())?;
    let exact = aff.solution(&y0, &times).map_err(|e| e.to_string())?;
    let transient = ys.iter().zip(&exact).map(|(a, b)| rel(a, b)).fold(0.0, f64::max);

    let decay = -sys.stability().map_err(|e| e.to_string())?;
    let t_long = 30.0 / decay;
    let grid = TimeGrid::resolving(0.0, t_long, rate, DEFAULT_STEP_RATIO, 1).map_err(|e| e.to_string())?;
    let (times, ys) = evolve_v3(&sys, &grid).map_err(|e| e.to_string())?;
    let steady = sys.periodic_steady_state().map_err(|e| e.to_string())?;
    let last = times.len() - 1;
    let long = rel(&ys[last], &steady.at(times[last]));
    check(
        times.len() >= 2 && transient < 1e-6 && long < 1e-6,
        format!(
            "closed form vs RK4 {transient:.1e} at 51 times, steady state vs t = {t_long:.2e} s {long:.1e} (< 1e-6)"
        ),
    )
}

type Csv = BTreeMap<String, Vec<f64>>;

/// Numeric columns of a CSV; text columns are kept as NaN except `error`, which must be empty.
fn read_csv(path: &Path) -> Result<(Csv, usize), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or("empty file")?.split(',').collect();
    let mut cols: Csv = header.iter().map(|h| (h.to_string(), Vec::new())).collect();
    let mut errors = 0;
    for line in lines {
        for (h, cell) in header.iter().zip(line.split(',')) {
            if *h == "error" {
                errors += usize::from(!cell.is_empty());
                continue;
            }
            cols.get_mut(*h).unwrap().push(cell.parse().unwrap_or(f64::NAN));
        }
    }
    cols.remove("error");
    Ok((cols, errors))
}

fn col<'a>(csv: &'a Csv, name: &str) -> Result<&'a [f64], String> {
    csv.get(name)
        .map(Vec::as_slice)
        .ok_or_else(|| format!("missing column {name}"))
}

fn figure_shapes(dir: &Path) -> Outcome {
    let load = |name: &str| read_csv(&dir.join(name)).map(|(c, _)| c);
    let mut notes = Vec::new();
    let mut ok = true;

    let a = load("fig2a_reduced3_r0.csv")?;
    let zero = col(&a, "E_N")?.iter().all(|&x| x == 0.0);
    ok &= zero;
    notes.push(format!("(a) r=0 E_N≡0 {zero}"));

    let b = load("fig2b_reduced3_steady.csv")?;
    let (keys, en) = (col(&b, "delta_over_omega_m")?, col(&b, "E_N")?);
    let at = |v: f64| keys.iter().position(|&k| (k - v).abs() < 1e-9).map(|i| en[i]);
    let (lo, mid, hi) = (at(0.5), at(1.0), at(1.5));
    let peak = matches!((lo, mid, hi), (Some(l), Some(m), Some(h)) if m >= l && m >= h);
    ok &= peak;
    notes.push(format!("(b) resonance max {peak}"));

    let (en, dp) = (load("fig2c_EN.csv")?, load("fig2c_dP2.csv")?);
    let (e, d) = (col(&en, "E_N")?, col(&dp, "dP2_minus")?);
    let same = e
        .iter()
        .zip(d)
        .all(|(&e, &d)| (d - 0.5).abs() < CRITERION_BAND || (e > 0.0) == (d < 0.5));
    ok &= same && e.iter().any(|&x| x > 0.0);
    notes.push(format!("(c) interval match {same}"));

    let dd = load("fig2d_EN.csv")?;
    let warm = col(&dd, "temperature")?
        .iter()
        .zip(col(&dd, "E_N")?)
        .any(|(&t, &e)| t >= 1e-3 && e > 0.0);
    ok &= warm;
    notes.push(format!("(d) E_N>0 at T≥1mK {warm}"));

    let mut r_opts = Vec::new();
    let mut u_shaped = true;
    for label in ["1e-8", "1e-7", "2e-6"] {
        let c = load(&format!("fig3a_power{label}_dP2.csv"))?;
        let (r, d) = (col(&c, "r")?, col(&c, "dP2_minus")?);
        let k = (0..d.len())
            .min_by(|&i, &j| d[i].total_cmp(&d[j]))
            .ok_or("empty sweep")?;
        u_shaped &= k > 0 && k + 1 < d.len();
        u_shaped &= d[..=k].windows(2).all(|w| w[1] <= w[0]) && d[k..].windows(2).all(|w| w[1] >= w[0]);
        r_opts.push(r[k]);
    }
    let falling = r_opts.windows(2).all(|w| w[1] < w[0]);
    let rb = load("fig3b_ropt.csv")?;
    let fine = col(&rb, "r_opt_numeric")?.windows(2).all(|w| w[1] < w[0]);
    ok &= u_shaped && falling && fine;
    notes.push(format!(
        "(e) U-shape {u_shaped}, r_opt {r_opts:?} falling {falling}, fine sweep falling {fine}"
    ));

    check(ok, notes.join("; "))
}

fn optimal_squeezing(dir: &Path) -> Outcome {
    let (c, errors) = read_csv(&dir.join("fig3b_ropt.csv"))?;
    let power = col(&c, "power")?;
    let (num, formula) = (col(&c, "r_opt_numeric")?, col(&c, "r_opt_formula")?);
    let mut worst = 0.0f64;
    let mut n = 0;
    for i in 0..power.len() {
        if power[i] < 1e-7 * (1.0 - 1e-9) || power[i] > 4e-6 * (1.0 + 1e-9) {
            continue;
        }
        n += 1;
        worst = worst.max((num[i] - formula[i]).abs());
    }
    let edge = reduced::optimal_squeezing(
        &{
            let mut p = PhysicalParams::baseline();
            p.power = 4e-6;
            p
        },
        1e-4,
    )
    .map_err(|e| e.to_string())?;
    let edge_dev = (edge.r_numeric - edge.r_formula.unwrap_or(f64::NAN)).abs();
    check(
        errors == 0 && n > 10 && worst < 0.02 && edge_dev < 0.02,
        format!("{n} powers in [0.1, 4] uW, max |r_formula - r_numeric| = {worst:.2e}, direct at 4 uW {edge_dev:.2e} (< 0.02)"),
    )
}

fn adiabatic_validity(dir: &Path) -> Outcome {
    let dev = |ratio: f64| -> Result<f64, String> {
        let mut p = PhysicalParams::baseline();
        p.kappa = p.gamma_m / ratio;
        let (full, red) = steady_dp2_pair(&p).map_err(|e| e.to_string())?;
        Ok((full - red).abs() / red)
    };
    let (small, large) = (dev(1.5e-4)?, dev(1.0)?);
    let (c, _) = read_csv(&dir.join("fig4a_deviation.csv"))?;
    let shipped = col(&c, "relative_deviation")?;
    let ends = (shipped[0] - small).abs() < 1e-9 && (shipped[shipped.len() - 1] - large).abs() < 1e-9;
    check(
        small < 0.05 && large > 0.2 && ends,
        format!(
            "deviation {small:.3} at 1.5e-4 (< 0.05), {large:.3} at 1 (> 0.2), shipped sweep endpoints agree {ends}"
        ),
    )
}

fn physicality(dir: &Path) -> Outcome {
    let (mut samples, mut bad) = (0usize, Vec::new());
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_none_or(|x| x != "csv") {
            continue;
        }
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let (c, errors) = read_csv(&path)?;
        if errors > 0 {
            bad.push(format!("{name}: {errors} failed rows"));
        }
        if let Some(nu) = c.get("nu_min") {
            samples += nu.len();
            if let Some(x) = nu.iter().find(|&&x| !(x >= 0.5 - 1e-6)) {
                bad.push(format!("{name}: nu_min {x}"));
            }
        }
        if let (Some(q), Some(p)) = (c.get("dQ2_minus"), c.get("dP2_minus")) {
            if let Some(x) = q.iter().zip(p).map(|(q, p)| q * p).find(|&x| !(x >= 0.25 - 1e-9)) {
                bad.push(format!("{name}: dQ2 dP2 {x}"));
            }
        }
        if let (Some(a), Some(b)) = (c.get("nu_tilde_1"), c.get("nu_tilde_2")) {
            if a.iter().zip(b).any(|(a, b)| !(a <= b)) {
                bad.push(format!("{name}: nu_tilde order"));
            }
        }
    }
    check(
        bad.is_empty() && samples > 0,
        format!("{samples} covariance samples, violations {bad:?}"),
    )
}

fn fock_oracle() -> Outcome {
    let (gamma, omega, nbar, s) = (1.0, 2.0, 0.5, 0.3);
    let (t_end, n_steps, stride) = (5.0 / gamma, 5000, 50);
    let fock = common::FockDecay {
        dim: 30,
        omega,
        gamma,
        nbar,
        squeezing: s,
    }
    .run(t_end, n_steps, stride);

    let mut spec = GeneratorSpec::new(1);
    spec.hamiltonian = DMatrix::identity(2, 2) * omega;
    spec.thermal_bath(&annihilation(1, 0), gamma, nbar);
    let eqs = compile(&spec).map_err(|e| e.to_string())?;
    let v0 = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![
        (-2.0 * s).exp() / 2.0,
        (2.0 * s).exp() / 2.0
    ]))
    .map_err(|e| e.to_string())?;
    let grid = TimeGrid::new(0.0, t_end, n_steps, stride).map_err(|e| e.to_string())?;
    let (_, covs) = integrate_raw(&eqs, &v0, &grid).map_err(|e| e.to_string())?;
    if covs.len() != fock.len() {
        return Err(format!("sample count {} vs {}", covs.len(), fock.len()));
    }
    let worst = covs
        .iter()
        .zip(&fock)
        .map(|(v, &(_, x2, p2))| (v[(0, 0)] - x2).abs().max((v[(1, 1)] - p2).abs()))
        .fold(0.0, f64::max);
    check(
        worst < 1e-4,
        format!(
            "<x^2>, <p^2> over {} samples, max deviation {worst:.1e} (< 1e-4)",
            covs.len()
        ),
    )
}

fn determinism(a: &Path, b: &Path) -> Outcome {
    let names = |d: &Path| -> Result<Vec<String>, String> {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name().to_string_lossy().to_string())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        v.sort();
        Ok(v)
    };
    let (na, nb) = (names(a)?, names(b)?);
    if na != nb {
        return Err("file sets differ".into());
    }
    let differing: Vec<&String> = na
        .iter()
        .filter(|n| std::fs::read(a.join(n)).ok() != std::fs::read(b.join(n)).ok())
        .collect();
    check(
        differing.is_empty(),
        format!(
            "{} CSV files across {} scenarios, differing {differing:?}",
            na.len(),
            Scenario::ALL.len()
        ),
    )
}

fn run_all(dir: &Path) -> Result<(), String> {
    for s in Scenario::ALL {
        let overrides = Overrides {
            out: Some(dir.to_path_buf()),
            ..Overrides::default()
        };
        let cfg = cli::resolve(s, None, &overrides, None).map_err(|e| format!("{}: {e}", s.name()))?;
        cli::run(&cfg, None).map_err(|e| format!("{}: {e}", s.name()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let first = tempfile::tempdir().expect("temp dir");
    let second = tempfile::tempdir().expect("temp dir");
    let runs = run_all(first.path()).and_then(|()| run_all(second.path()));
    let shipped = |f: &dyn Fn(&Path) -> Outcome| match &runs {
        Ok(()) => f(first.path()),
        Err(e) => Err(format!("scenario run failed: {e}")),
    };

    let criteria: Vec<Criterion> = vec![
        ("criterion equivalence", Box::new(criterion_equivalence)),
        ("closure of the ten-moment system", Box::new(closure)),
        ("compiled drift and drive vs closed forms", Box::new(compiled_matrices)),
        ("closed-form solution vs integration", Box::new(analytic_vs_numeric)),
        ("figure shapes", Box::new(|| shipped(&figure_shapes))),
        ("optimal squeezing formula", Box::new(|| shipped(&optimal_squeezing))),
        (
            "adiabatic elimination validity",
            Box::new(|| shipped(&adiabatic_validity)),
        ),
        ("physicality of shipped outputs", Box::new(|| shipped(&physicality))),
        ("Fock-space oracle", Box::new(fock_oracle)),
        (
            "deterministic output",
            Box::new(|| match &runs {
                Ok(()) => determinism(first.path(), second.path()),
                Err(e) => Err(format!("scenario run failed: {e}")),
            }),
        ),
    ];

    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} {:>2} {name}: {detail} [{:.1}s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
