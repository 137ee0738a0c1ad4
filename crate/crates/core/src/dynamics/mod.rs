//! Time integration, matrix exponentials, periodic steady states and scalar
//! minimization.

mod expm;
mod minimize;
mod steady;

pub use expm::{expm_action, ExpmMethod, EIGVEC_COND_LIMIT};
pub use minimize::{minimize_scalar, Minimum};
pub use steady::{check_hurwitz, periodic_steady_state, AffineSystem, PeriodicAffineState, PeriodicSteadyState};

use nalgebra::{DMatrix, SMatrix};

use crate::compiler::MomentEquations;
use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, QuadratureObservables};

/// Largest admissible `h · (fastest rate)`.
pub const MAX_STEP_RATIO: f64 = 0.1;

/// Step ratio used when a grid is sized automatically.
pub const DEFAULT_STEP_RATIO: f64 = 0.02;

/// Entries beyond this magnitude are treated as a diverged integration.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
    pub sample_stride: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_steps: usize, sample_stride: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::Grid(format!("need finite t1 > t0, got [{t0:e}, {t1:e}]")));
        }
        if n_steps == 0 || sample_stride == 0 {
            return Err(Error::Grid("n_steps and sample_stride must be positive".into()));
        }
        Ok(Self {
            t0,
            t1,
            n_steps,
            sample_stride,
        })
    }

    /// Grid over `[t0, t1]` with `h · max_rate ≤ step_ratio` and about
    /// `n_samples` evenly spaced samples (plus the initial one).
    pub fn resolving(t0: f64, t1: f64, max_rate: f64, step_ratio: f64, n_samples: usize) -> Result<Self> {
        let n_samples = n_samples.max(1);
        let needed = ((t1 - t0) * max_rate / step_ratio).ceil().max(1.0);
        if !needed.is_finite() || needed > 1e11 {
            return Err(Error::Grid(format!("grid would need {needed:e} steps")));
        }
        let stride = (needed as usize).div_ceil(n_samples);
        Self::new(t0, t1, stride * n_samples, stride)
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }

    pub fn check_resolution(&self, max_rate: f64) -> Result<()> {
        let ratio = self.step() * max_rate;
        if ratio > MAX_STEP_RATIO {
            return Err(Error::StepTooCoarse {
                ratio,
                limit: MAX_STEP_RATIO,
            });
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    fn is_sample(&self, k: usize) -> bool {
        k.is_multiple_of(self.sample_stride) || k == self.n_steps
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.n_steps)
            .filter(|&k| self.is_sample(k))
            .map(|k| self.time(k))
            .collect()
    }
}

/// Covariances sampled on a grid together with their observables.
///
/// Observables refer to the last two modes, which are the mirrors in every
/// model of this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub covariances: Vec<CovarianceMatrix>,
    pub observables: Vec<QuadratureObservables>,
}

impl Trajectory {
    pub fn from_covariances(times: Vec<f64>, covariances: Vec<CovarianceMatrix>) -> Result<Self> {
        if times.len() != covariances.len() {
            return Err(Error::Dimension("times and covariances differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("sample times must increase strictly".into()));
        }
        let observables = covariances.iter().map(mirror_observables).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            covariances,
            observables,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(&f64, &CovarianceMatrix, &QuadratureObservables)> {
        let k = self.len().checked_sub(1)?;
        Some((&self.times[k], &self.covariances[k], &self.observables[k]))
    }
}

/// Observables of the last two modes of `v`.
pub fn mirror_observables(v: &CovarianceMatrix) -> Result<QuadratureObservables> {
    let n = v.n_modes();
    if n < 2 {
        return Err(Error::UnsupportedModes { expected: 2, got: n });
    }
    if n == 2 {
        QuadratureObservables::from_covariance(v)
    } else {
        QuadratureObservables::from_covariance(&v.marginal(&[n - 2, n - 1])?)
    }
}

/// Fastest rate of the flow `dy/dt = M y + b(t)` with carrier `omega`: the
/// spectral radius of `M` or the drive frequency, whichever is larger.
pub fn fastest_rate(m: &DMatrix<f64>, omega: f64) -> f64 {
    let radius = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    radius.max(omega.abs())
}

/// State of a one-step integrator.
pub trait OdeState: Clone {
    fn zeros_like(&self) -> Self;
    fn copy_from(&mut self, other: &Self);
    /// `self += a·x`
    fn add_scaled(&mut self, a: f64, x: &Self);
    fn symmetrize(&mut self);
    fn max_abs(&self) -> f64;
}

impl OdeState for DMatrix<f64> {
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }

    fn copy_from(&mut self, other: &Self) {
        nalgebra::Matrix::copy_from(self, other);
    }

    fn add_scaled(&mut self, a: f64, x: &Self) {
        self.zip_apply(x, |yi, xi| *yi += a * xi);
    }

    fn symmetrize(&mut self) {
        symmetrize_in_place(self);
    }

    fn max_abs(&self) -> f64 {
        self.iter()
            .fold(0.0, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY })
    }
}

impl<const R: usize, const C: usize> OdeState for SMatrix<f64, R, C> {
    fn zeros_like(&self) -> Self {
        SMatrix::zeros()
    }

    fn copy_from(&mut self, other: &Self) {
        *self = *other;
    }

    fn add_scaled(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }

    fn symmetrize(&mut self) {
        symmetrize_in_place(self);
    }

    fn max_abs(&self) -> f64 {
        self.iter()
            .fold(0.0, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY })
    }
}

fn symmetrize_in_place<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::StorageMut<f64, R, C>>(
    y: &mut nalgebra::Matrix<f64, R, C, S>,
) {
    let n = y.nrows().min(y.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (y[(i, j)] + y[(j, i)]);
            y[(i, j)] = s;
            y[(j, i)] = s;
        }
    }
}

/// Classic fourth-order Runge-Kutta over `grid`, returning the samples.
///
/// `f(t, y, dy)` writes the derivative into `dy`. With `symmetric` the state
/// is re-symmetrized after every step.
pub fn rk4<S, F>(grid: &TimeGrid, y0: S, symmetric: bool, mut f: F) -> Result<(Vec<f64>, Vec<S>)>
where
    S: OdeState,
    F: FnMut(f64, &S, &mut S),
{
    let h = grid.step();
    let mut y = y0;
    let mut k1 = y.zeros_like();
    let mut k2 = y.zeros_like();
    let mut k3 = y.zeros_like();
    let mut k4 = y.zeros_like();
    let mut tmp = y.zeros_like();
    let n_samples = grid.n_steps / grid.sample_stride + 2;
    let mut times = Vec::with_capacity(n_samples);
    let mut samples = Vec::with_capacity(n_samples);
    times.push(grid.t0);
    samples.push(y.clone());
    for k in 0..grid.n_steps {
        let t = grid.time(k);
        f(t, &y, &mut k1);
        tmp.copy_from(&y);
        tmp.add_scaled(0.5 * h, &k1);
        f(t + 0.5 * h, &tmp, &mut k2);
        tmp.copy_from(&y);
        tmp.add_scaled(0.5 * h, &k2);
        f(t + 0.5 * h, &tmp, &mut k3);
        tmp.copy_from(&y);
        tmp.add_scaled(h, &k3);
        f(t + h, &tmp, &mut k4);
        y.add_scaled(h / 6.0, &k1);
        y.add_scaled(h / 3.0, &k2);
        y.add_scaled(h / 3.0, &k3);
        y.add_scaled(h / 6.0, &k4);
        if symmetric {
            y.symmetrize();
        }
        if !(y.max_abs() <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { last_valid_time: t });
        }
        if grid.is_sample(k + 1) {
            times.push(grid.time(k + 1));
            samples.push(y.clone());
        }
    }
    Ok((times, samples))
}

/// Integrates `dV/dt = A V + V Aᵀ + D(t)` from `v0`.
pub fn integrate(eqs: &MomentEquations, v0: &CovarianceMatrix, grid: &TimeGrid) -> Result<Trajectory> {
    let (times, samples) = integrate_raw(eqs, v0, grid)?;
    let covs = samples
        .into_iter()
        .map(CovarianceMatrix::new)
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_covariances(times, covs)
}

/// As [`integrate`], without building observables.
pub fn integrate_raw(
    eqs: &MomentEquations,
    v0: &CovarianceMatrix,
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<DMatrix<f64>>)> {
    if v0.dim() != eqs.dim() {
        return Err(Error::Dimension(format!(
            "initial covariance is {}x{}, equations are {}-dimensional",
            v0.dim(),
            v0.dim(),
            eqs.dim()
        )));
    }
    grid.check_resolution(fastest_rate(&eqs.drift, eqs.frequency / 2.0))?;
    rk4(grid, v0.matrix().clone(), true, |t, v, dv| eqs.rhs(t, v, dv))
}
