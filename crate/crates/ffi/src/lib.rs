//! C ABI over the simulation library.
//!
//! Every function returns an [`SqzStatus`]; on failure a description is
//! available from [`sqz_last_error`] on the same thread. Parameters use the
//! library's units: angular frequencies in rad/s, power in W, temperature in K.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sqzmirror::cli::scenario::model_rate;
use sqzmirror::cli::Model;
use sqzmirror::coefficients::PhysicalParams;
use sqzmirror::dynamics::{TimeGrid, Trajectory};
use sqzmirror::full::{self, Coupling};
use sqzmirror::gaussian::{log_negativity, symplectic_eigenvalues, CovarianceMatrix};
use sqzmirror::reduced::{self, Phase};
use sqzmirror::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParameter = 3,
    Unstable = 4,
    Numeric = 5,
    Unphysical = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzPhase {
    Plus = 0,
    Minus = 1,
    Average = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqzModel {
    Reduced3 = 0,
    Reduced10 = 1,
    ReducedAnalytic = 2,
    Full6 = 3,
}

/// Mirror observables at one time or in the steady state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqzObservables {
    pub e_n: f64,
    pub dp2_minus: f64,
    pub dq2_minus: f64,
    pub theta: f64,
    pub n_phonon: [f64; 2],
    pub nu_tilde: [f64; 2],
    pub min_symplectic: f64,
}

/// Steady-state observables plus the entanglement criterion.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqzSteadyState {
    pub observables: SqzObservables,
    pub threshold: f64,
    pub entangled: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SqzOptimalSqueezing {
    pub r_numeric: f64,
    pub dp2_min: f64,
    /// NaN when the stationarity condition has no solution.
    pub r_formula: f64,
    pub at_boundary: bool,
}

/// Opaque parameter set.
pub struct SqzParams(PhysicalParams);

/// Opaque sampled trajectory.
pub struct SqzTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SqzStatus {
    match e {
        Error::Parameter { .. } => SqzStatus::InvalidParameter,
        Error::Unstable { .. } => SqzStatus::Unstable,
        Error::Divergence { .. } | Error::Singular(_) => SqzStatus::Numeric,
        Error::Physicality(_) => SqzStatus::Unphysical,
        Error::Grid(_) | Error::StepTooCoarse { .. } | Error::Dimension(_) | Error::UnsupportedModes { .. } => {
            SqzStatus::InvalidArgument
        }
        _ => SqzStatus::Internal,
    }
}

struct Failure(SqzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SqzStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `f`, records any failure and converts panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SqzStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SqzStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SqzStatus::Internal
        }
    }
}

unsafe fn params<'a>(p: *const SqzParams) -> Result<&'a PhysicalParams, Failure> {
    p.as_ref().map(|p| &p.0).ok_or_else(|| null("params"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn phase(p: SqzPhase) -> Phase {
    match p {
        SqzPhase::Plus => Phase::PLUS,
        SqzPhase::Minus => Phase::MINUS,
        SqzPhase::Average => Phase::Average,
    }
}

fn observables(o: &sqzmirror::gaussian::QuadratureObservables, min_symplectic: f64) -> SqzObservables {
    let (nu1, nu2) = o.nu_tilde_from_variances();
    SqzObservables {
        e_n: o.e_n,
        dp2_minus: o.dp2_minus,
        dq2_minus: o.dq2_minus,
        theta: o.theta,
        n_phonon: [o.phonon[0], o.phonon[1]],
        nu_tilde: [nu1, nu2],
        min_symplectic,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sqz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Baseline parameter set; release with [`sqz_params_free`].
#[no_mangle]
pub extern "C" fn sqz_params_new_baseline() -> *mut SqzParams {
    Box::into_raw(Box::new(SqzParams(PhysicalParams::baseline())))
}

/// # Safety
/// `p` must come from [`sqz_params_new_baseline`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sqz_params_free(p: *mut SqzParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn field<'a>(p: &'a mut PhysicalParams, name: &str) -> Result<&'a mut f64, Failure> {
    Ok(match name {
        "omega_c" => &mut p.omega_c,
        "kappa" => &mut p.kappa,
        "omega_m" => &mut p.omega_m,
        "gamma_m" => &mut p.gamma_m,
        "eta0" => &mut p.eta0,
        "power" => &mut p.power,
        "delta" => &mut p.delta,
        "r" => &mut p.r,
        "temperature" => &mut p.temperature,
        "drive_prefactor" => &mut p.drive_prefactor,
        _ => {
            return Err(Failure(
                SqzStatus::InvalidArgument,
                format!("unknown parameter `{name}`"),
            ))
        }
    })
}

unsafe fn name_arg<'a>(name: *const c_char) -> Result<&'a str, Failure> {
    if name.is_null() {
        return Err(null("name"));
    }
    CStr::from_ptr(name)
        .to_str()
        .map_err(|_| Failure(SqzStatus::InvalidArgument, "name is not UTF-8".into()))
}

/// Sets a field by name. The full set is validated by the compute calls.
///
/// # Safety
/// `p` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sqz_params_set(p: *mut SqzParams, name: *const c_char, value: f64) -> SqzStatus {
    guard(|| {
        let p = out_ref(p, "params")?;
        *field(&mut p.0, name_arg(name)?)? = value;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle, `name` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_params_get(p: *const SqzParams, name: *const c_char, out: *mut f64) -> SqzStatus {
    guard(|| {
        let mut copy = *params(p)?;
        let v = *field(&mut copy, name_arg(name)?)?;
        *out_ref(out, "out")? = v;
        Ok(())
    })
}

/// Steady state of the adiabatically eliminated model.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_reduced_steady_state(
    p: *const SqzParams,
    ph: SqzPhase,
    out: *mut SqzSteadyState,
) -> SqzStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = reduced::steady_state(params(p)?, phase(ph))?;
        *out = SqzSteadyState {
            observables: observables(&s.observables, s.covariance.min_symplectic_eigenvalue()),
            threshold: s.criterion.threshold,
            entangled: s.criterion.entangled,
        };
        Ok(())
    })
}

/// Steady state of the cavity-plus-mirrors model.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_full_steady_state(
    p: *const SqzParams,
    ph: SqzPhase,
    single_mirror: bool,
    out: *mut SqzSteadyState,
) -> SqzStatus {
    guard(|| {
        let coupling = if single_mirror {
            Coupling::SingleMirror
        } else {
            Coupling::Antisymmetric
        };
        let out = out_ref(out, "out")?;
        let s = full::steady_state_full(params(p)?, phase(ph), coupling)?;
        *out = SqzSteadyState {
            observables: observables(&s.observables, s.covariance.min_symplectic_eigenvalue()),
            threshold: s.criterion.threshold,
            entangled: s.criterion.entangled,
        };
        Ok(())
    })
}

/// Squeezing degree minimizing the steady relative-momentum variance.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_optimal_squeezing(
    p: *const SqzParams,
    tol: f64,
    out: *mut SqzOptimalSqueezing,
) -> SqzStatus {
    guard(|| {
        if !(tol > 0.0) {
            return Err(Failure(SqzStatus::InvalidArgument, "tol must be positive".into()));
        }
        let out = out_ref(out, "out")?;
        let o = reduced::optimal_squeezing(params(p)?, tol)?;
        *out = SqzOptimalSqueezing {
            r_numeric: o.r_numeric,
            dp2_min: o.dp2_min,
            r_formula: o.r_formula.unwrap_or(f64::NAN),
            at_boundary: o.at_boundary,
        };
        Ok(())
    })
}

unsafe fn covariance(v: *const f64, n_modes: usize) -> Result<CovarianceMatrix, Failure> {
    if v.is_null() {
        return Err(null("covariance"));
    }
    if n_modes == 0 {
        return Err(Failure(SqzStatus::InvalidArgument, "n_modes must be positive".into()));
    }
    let dim = 2 * n_modes;
    let entries = std::slice::from_raw_parts(v, dim * dim);
    Ok(CovarianceMatrix::from_row_slice(n_modes, entries)?)
}

/// Logarithmic negativity of a two-mode covariance given as 16 row-major
/// entries in `(x1, p1, x2, p2)` order.
///
/// # Safety
/// `v` must point to 16 readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_log_negativity(v: *const f64, out: *mut f64) -> SqzStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = log_negativity(&covariance(v, 2)?)?.value;
        Ok(())
    })
}

/// Symplectic eigenvalues, ascending, of an `n_modes`-mode covariance given
/// as `(2 n_modes)²` row-major entries.
///
/// # Safety
/// `v` must point to `(2 n_modes)²` readable doubles and `out` to `out_len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sqz_symplectic_eigenvalues(
    v: *const f64,
    n_modes: usize,
    out: *mut f64,
    out_len: usize,
) -> SqzStatus {
    guard(|| {
        let cov = covariance(v, n_modes)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < n_modes {
            return Err(Failure(
                SqzStatus::BufferTooSmall,
                format!("need {n_modes} entries, got {out_len}"),
            ));
        }
        let nu = symplectic_eigenvalues(&cov);
        std::slice::from_raw_parts_mut(out, n_modes).copy_from_slice(&nu);
        Ok(())
    })
}

fn model(m: SqzModel) -> Model {
    match m {
        SqzModel::Reduced3 => Model::Reduced3,
        SqzModel::Reduced10 => Model::Reduced10,
        SqzModel::ReducedAnalytic => Model::ReducedAnalytic,
        SqzModel::Full6 => Model::Full6,
    }
}

/// Evolves from the thermal state to `t_end` seconds with `h · rate ≤
/// step_ratio` and about `samples` samples. Release with
/// [`sqz_trajectory_free`].
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_evolve(
    p: *const SqzParams,
    m: SqzModel,
    t_end: f64,
    step_ratio: f64,
    samples: usize,
    out: *mut *mut SqzTrajectory,
) -> SqzStatus {
    guard(|| {
        let p = params(p)?;
        let out = out_ref(out, "out")?;
        let grid = TimeGrid::resolving(
            0.0,
            t_end,
            model_rate(model(m), p, Coupling::Antisymmetric)?,
            step_ratio,
            samples,
        )?;
        let tr = match m {
            SqzModel::Reduced3 => reduced::evolve(p, &grid)?,
            SqzModel::Reduced10 => reduced::evolve_full10(p, &grid)?,
            SqzModel::ReducedAnalytic => reduced::evolve_analytic(p, &grid.sample_times())?,
            SqzModel::Full6 => full::evolve_full(p, &grid, None, Coupling::Antisymmetric)?,
        };
        *out = Box::into_raw(Box::new(SqzTrajectory(tr)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from [`sqz_evolve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sqz_trajectory_free(t: *mut SqzTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sqz_trajectory_len(t: *const SqzTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Time and observables of sample `k`.
///
/// # Safety
/// `t` must be a live handle; `time` and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sqz_trajectory_sample(
    t: *const SqzTrajectory,
    k: usize,
    time: *mut f64,
    out: *mut SqzObservables,
) -> SqzStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| null("trajectory"))?.0;
        if k >= t.len() {
            return Err(Failure(
                SqzStatus::InvalidArgument,
                format!("sample {k} out of range 0..{}", t.len()),
            ));
        }
        let o = observables(&t.observables[k], t.covariances[k].min_symplectic_eigenvalue());
        *out_ref(time, "time")? = t.times[k];
        *out_ref(out, "out")? = o;
        Ok(())
    })
}
