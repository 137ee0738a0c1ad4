//! Two mirrors with the cavity adiabatically eliminated.
//!
//! For identical mirrors in thermal equilibrium the covariance is fixed by three
//! numbers `(V11, V22, V12)`; the remaining entries follow from
//! `V33 = V11`, `V44 = V22`, `V34 = V12`, `V14 = V23 = −V12` and
//! `V13 = c − V11`, `V24 = c − V22` with `c = n̄₀ + ½`.
//! The three-variable system `dV³/dt = M V³ + B(t)` is obtained from the
//! compiled four-mode-quadrature equations by restricting them to that manifold.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::coefficients::{derive, DerivedCoefficients, PhysicalParams};
use crate::compiler::{compile, reduced_generator, MomentEquations};
use crate::dynamics::{
    check_hurwitz, fastest_rate, integrate, minimize_scalar, periodic_steady_state, rk4, AffineSystem,
    PeriodicAffineState, TimeGrid, Trajectory,
};
use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, rotate_local, rotation_angle, CovarianceMatrix, QuadratureObservables};

/// `|V̄12|` above which a covariance is not considered to be in the rotated frame.
pub const FRAME_TOL: f64 = 1e-8;

/// Band around the criterion threshold inside which disagreement with `E_N` is tolerated.
pub const CRITERION_BAND: f64 = 1e-9;

/// Bracket searched for the optimal squeezing degree.
pub const R_BRACKET: (f64, f64) = (0.0, 3.0);

const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_CAP: usize = 50;

/// Entries `(V11, V22, V12)` read from a 4x4 covariance.
const CLOSURE: [(usize, usize); 3] = [(0, 0), (1, 1), (0, 1)];

/// Evaluation phase `e^{2iΔt}` of the periodic steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// `e^{2iΔt} = e^{iφ}`.
    Angle(f64),
    /// The period average.
    Average,
}

impl Phase {
    pub const PLUS: Phase = Phase::Angle(0.0);
    pub const MINUS: Phase = Phase::Angle(std::f64::consts::PI);

    fn factor(self) -> Complex64 {
        match self {
            Phase::Angle(phi) => Complex64::from_polar(1.0, phi),
            Phase::Average => Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    /// `(V11, V22, V12)`
    pub v3: [f64; 3],
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub coeffs: DerivedCoefficients,
    pub m3: DMatrix<f64>,
    pub b0: DVector<f64>,
    pub b1: DVector<f64>,
    pub b2: DVector<Complex64>,
}

/// Restricts compiled two-mirror equations to the symmetric manifold:
/// returns `(M, b_dc, b_up)`.
fn restrict(eqs: &MomentEquations, nbar0: f64) -> (DMatrix<f64>, DVector<f64>, DVector<Complex64>) {
    let a = &eqs.drift;
    let flow = |v: &DMatrix<f64>| a * v + v * a.transpose();
    let read = |m: &DMatrix<f64>| DVector::from_iterator(3, CLOSURE.iter().map(|&ij| m[ij]));
    let base = assemble_matrix([0.0; 3], nbar0);
    let mut m3 = DMatrix::zeros(3, 3);
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let ek = assemble_matrix(e, nbar0) - &base;
        m3.set_column(k, &read(&flow(&ek)));
    }
    let b_dc = read(&(flow(&base) + &eqs.diffusion_dc));
    let b_up = DVector::from_iterator(3, CLOSURE.iter().map(|&ij| eqs.diffusion_up[ij]));
    (m3, b_dc, b_up)
}

fn assemble_matrix(v3: [f64; 3], nbar0: f64) -> DMatrix<f64> {
    let [v11, v22, v12] = v3;
    let c = nbar0 + 0.5;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            v11,
            v12,
            c - v11,
            -v12,
            v12,
            v22,
            -v12,
            c - v22,
            c - v11,
            -v12,
            v11,
            v12,
            -v12,
            c - v22,
            v12,
            v22,
        ],
    )
}

/// Four-by-four covariance of the symmetric manifold point `v3`.
pub fn assemble(v3: [f64; 3], nbar0: f64) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(assemble_matrix(v3, nbar0))
}

/// `(n̄₀ + ½, n̄₀ + ½, 0)`: both mirrors thermalized with their baths.
pub fn initial_state(nbar0: f64) -> [f64; 3] {
    [nbar0 + 0.5, nbar0 + 0.5, 0.0]
}

pub fn build_system(params: &PhysicalParams) -> Result<ReducedSystem> {
    let coeffs = derive(params)?;
    let compiled = |n: f64, m: f64| -> Result<MomentEquations> {
        compile(&reduced_generator(&coeffs.with_squeezing_weights(n, m), 0.0)?)
    };
    // Everything is affine in (N, M); unit weights isolate each part.
    let (m3, b0, _) = restrict(&compiled(0.0, 0.0)?, coeffs.nbar0);
    let (_, bn, _) = restrict(&compiled(1.0, 0.0)?, coeffs.nbar0);
    let (_, _, b2) = restrict(&compiled(0.0, 1.0)?, coeffs.nbar0);
    Ok(ReducedSystem {
        coeffs,
        m3,
        b1: bn - &b0,
        b0,
        b2,
    })
}

impl ReducedSystem {
    pub fn nbar0(&self) -> f64 {
        self.coeffs.nbar0
    }

    pub fn delta(&self) -> f64 {
        self.coeffs.params.delta
    }

    /// `B(t) = B₀ + N B₁ + M (B₂ e^{2iΔt} + c.c.)`.
    pub fn drive(&self, t: f64) -> DVector<f64> {
        self.affine().drive(t)
    }

    pub fn affine(&self) -> AffineSystem {
        AffineSystem {
            matrix: self.m3.clone(),
            b_dc: &self.b0 + &self.b1 * self.coeffs.n_sq,
            b_up: &self.b2 * Complex64::new(self.coeffs.m_sq, 0.0),
            omega: self.coeffs.modulation_frequency(),
        }
    }

    /// Spectral abscissa of `M`; an error when it is not Hurwitz.
    pub fn stability(&self) -> Result<f64> {
        check_hurwitz(&self.m3)
    }

    pub fn periodic_steady_state(&self) -> Result<PeriodicAffineState> {
        self.affine().periodic_steady_state()
    }

    pub fn steady_v3(&self, phase: Phase) -> Result<[f64; 3]> {
        let p = self.periodic_steady_state()?;
        let v = p.at_phase(phase.factor());
        Ok([v[0], v[1], v[2]])
    }
}

fn lift(times: Vec<f64>, states: impl IntoIterator<Item = [f64; 3]>, nbar0: f64) -> Result<Trajectory> {
    let covs = states
        .into_iter()
        .map(|v| assemble(v, nbar0))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_covariances(times, covs)
}

/// Integrates the three-variable system from the thermal state.
pub fn evolve(params: &PhysicalParams, grid: &TimeGrid) -> Result<Trajectory> {
    let sys = build_system(params)?;
    let (times, states) = evolve_v3(&sys, grid)?;
    lift(times, states, sys.nbar0())
}

/// Raw `(V11, V22, V12)` samples of the three-variable integration.
pub fn evolve_v3(sys: &ReducedSystem, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
    let affine = sys.affine();
    grid.check_resolution(fastest_rate(&affine.matrix, affine.omega / 2.0))?;
    let m = Matrix3::from_iterator(affine.matrix.iter().copied());
    let b_dc = Vector3::from_iterator(affine.b_dc.iter().copied());
    let b_up = Vector3::from_iterator(affine.b_up.iter().copied());
    let w = affine.omega;
    let y0 = Vector3::from(initial_state(sys.nbar0()));
    let (times, samples) = rk4(grid, y0, false, |t, y, dy| {
        let e = Complex64::from_polar(2.0, w * t);
        *dy = m * y + b_dc + b_up.map(|z| (z * e).re);
    })?;
    Ok((times, samples.iter().map(|y| [y[0], y[1], y[2]]).collect()))
}

/// Closed-form three-variable solution at `times`.
pub fn evolve_analytic(params: &PhysicalParams, times: &[f64]) -> Result<Trajectory> {
    let sys = build_system(params)?;
    let y0 = DVector::from_column_slice(&initial_state(sys.nbar0()));
    let states = sys.affine().solution(&y0, times)?;
    lift(times.to_vec(), states.iter().map(|y| [y[0], y[1], y[2]]), sys.nbar0())
}

/// Integrates all ten second moments of the two mirrors.
pub fn evolve_full10(params: &PhysicalParams, grid: &TimeGrid) -> Result<Trajectory> {
    let coeffs = derive(params)?;
    let eqs = compile(&reduced_generator(&coeffs, 0.0)?)?;
    integrate(&eqs, &CovarianceMatrix::thermal(2, coeffs.nbar0), grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub dp2_minus: f64,
    pub threshold: f64,
    pub entangled: bool,
    pub e_n: f64,
    /// `entangled` and `E_N > 0` agree, or `δP̄²₋` lies within the tolerance band.
    pub consistent: bool,
}

/// `1/[2(2n̄₀ + 1)]`
pub fn threshold(nbar0: f64) -> f64 {
    1.0 / (2.0 * (2.0 * nbar0 + 1.0))
}

/// Entanglement test on a covariance in the rotated frame.
pub fn criterion(vbar: &CovarianceMatrix, nbar0: f64) -> Result<CriterionReport> {
    if vbar.n_modes() != 2 {
        return Err(Error::UnsupportedModes {
            expected: 2,
            got: vbar.n_modes(),
        });
    }
    let v12 = vbar.get(0, 1);
    if v12.abs() > FRAME_TOL {
        return Err(Error::FrameNotRotated(v12.abs()));
    }
    let dp2_minus = vbar.get(1, 1) - vbar.get(1, 3);
    let threshold = threshold(nbar0);
    let entangled = dp2_minus < threshold;
    let e_n = log_negativity(vbar)?.value;
    let consistent = entangled == (e_n > 0.0) || (dp2_minus - threshold).abs() <= CRITERION_BAND;
    Ok(CriterionReport {
        dp2_minus,
        threshold,
        entangled,
        e_n,
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyReport {
    pub state: ReducedState,
    pub covariance: CovarianceMatrix,
    pub observables: QuadratureObservables,
    pub criterion: CriterionReport,
}

pub fn steady_state(params: &PhysicalParams, phase: Phase) -> Result<SteadyReport> {
    steady_report(&build_system(params)?, phase)
}

pub fn steady_report(sys: &ReducedSystem, phase: Phase) -> Result<SteadyReport> {
    let v3 = sys.steady_v3(phase)?;
    let covariance = assemble(v3, sys.nbar0())?;
    let observables = QuadratureObservables::from_covariance(&covariance)?;
    let vbar = rotate_local(&covariance, observables.theta)?;
    let criterion = criterion(&vbar, sys.nbar0())?;
    Ok(SteadyReport {
        state: ReducedState { v3, t: None },
        covariance,
        observables,
        criterion,
    })
}

/// Steady state of all ten second moments, solved without the closure.
pub fn steady_state_moments(params: &PhysicalParams, phase: Phase) -> Result<SteadyReport> {
    let coeffs = derive(params)?;
    let eqs = compile(&reduced_generator(&coeffs, 0.0)?)?;
    let ss = periodic_steady_state(&eqs)?;
    let covariance = CovarianceMatrix::symmetrized(ss.at_phase(phase.factor()))?;
    let observables = QuadratureObservables::from_covariance(&covariance)?;
    let vbar = rotate_local(&covariance, observables.theta)?;
    let criterion = criterion(&vbar, coeffs.nbar0)?;
    let v3 = CLOSURE.map(|ij| covariance.get(ij.0, ij.1));
    Ok(SteadyReport {
        state: ReducedState { v3, t: None },
        covariance,
        observables,
        criterion,
    })
}

/// Steady `δP̄²₋` at phase `+1` as a function of the squeezing degree.
pub fn steady_dp2(params: &PhysicalParams, r: f64) -> Result<f64> {
    let mut p = *params;
    p.r = r;
    Ok(steady_state(&p, Phase::PLUS)?.criterion.dp2_minus)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSqueezing {
    pub r_numeric: f64,
    pub dp2_min: f64,
    /// The numeric minimum sits on the edge of the searched bracket.
    pub at_boundary: bool,
    /// Stationarity condition `tanh 2r = 2 Θ·Re[(2iΔ − M)⁻¹B₂] / (Θ·M⁻¹B₁)`.
    pub r_formula: Option<f64>,
    /// The same condition without the factor 2.
    pub r_formula_printed: Option<f64>,
    pub theta: f64,
    pub note: Option<String>,
}

/// `Θ = (sin²(θ/2), cos²(θ/2), −sin θ)`, so that `V̄22 = Θ·V³`.
pub fn theta_projection(theta: f64) -> DVector<f64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DVector::from_vec(vec![s * s, c * c, -theta.sin()])
}

/// Right-hand side `x` of `tanh 2r = x` at squeezing `r`, scaled by `factor`.
fn stationarity_rhs(params: &PhysicalParams, r: f64, factor: f64) -> Result<(f64, f64)> {
    let mut p = *params;
    p.r = r;
    let sys = build_system(&p)?;
    let cov = assemble(sys.steady_v3(Phase::PLUS)?, sys.nbar0())?;
    let theta = rotation_angle(&cov)?.theta;
    let proj = theta_projection(theta);
    let n = sys.m3.nrows();
    let shifted = DMatrix::identity(n, n) * Complex64::new(0.0, sys.coeffs.modulation_frequency())
        - sys.m3.map(|x| Complex64::new(x, 0.0));
    let res_b2 = shifted
        .lu()
        .solve(&sys.b2)
        .ok_or_else(|| Error::Singular("shifted drift matrix".into()))?;
    let m_b1 = sys
        .m3
        .clone()
        .lu()
        .solve(&sys.b1)
        .ok_or_else(|| Error::Singular("drift matrix".into()))?;
    let num = proj.dot(&res_b2.map(|z| z.re));
    let den = proj.dot(&m_b1);
    Ok((factor * num / den, theta))
}

/// Fixed point of `r ← ½ artanh x(r)`; `Err` carries the reason it has none.
fn formula_fixed_point(params: &PhysicalParams, factor: f64, start: f64) -> std::result::Result<(f64, f64), String> {
    let mut r = start;
    for _ in 0..FIXED_POINT_CAP {
        let (x, theta) = stationarity_rhs(params, r, factor).map_err(|e| e.to_string())?;
        if !(x.abs() < 1.0) {
            return Err(format!("artanh argument {x:.6} outside (-1, 1)"));
        }
        let next = 0.5 * x.atanh();
        if (next - r).abs() < FIXED_POINT_TOL {
            return Ok((next, theta));
        }
        r = next;
    }
    Err(format!("no convergence within {FIXED_POINT_CAP} iterations"))
}

/// Squeezing degree minimizing the steady `δP̄²₋`, numerically and from the
/// stationarity condition.
pub fn optimal_squeezing(params: &PhysicalParams, tol: f64) -> Result<OptimalSqueezing> {
    let mut failure = None;
    let min = minimize_scalar(
        |r| match steady_dp2(params, r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        R_BRACKET.0,
        R_BRACKET.1,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let start = 0.5;
    let derived = formula_fixed_point(params, 2.0, start);
    let printed = formula_fixed_point(params, 1.0, start);
    let mut notes = Vec::new();
    if let Err(e) = &derived {
        notes.push(format!("formula: {e}"));
    }
    if let Err(e) = &printed {
        notes.push(format!("printed formula: {e}"));
    }
    let theta = match &derived {
        Ok((_, theta)) => *theta,
        Err(_) => {
            let mut p = *params;
            p.r = min.x;
            steady_state(&p, Phase::PLUS)?.observables.theta
        }
    };
    Ok(OptimalSqueezing {
        r_numeric: min.x,
        dp2_min: min.fx,
        at_boundary: min.at_boundary,
        r_formula: derived.ok().map(|(r, _)| r),
        r_formula_printed: printed.ok().map(|(r, _)| r),
        theta,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}
