//! Linearized cavity plus two mirrors without adiabatic elimination.
//!
//! Quadratures are ordered `(x_c, p_c, x1, p1, x2, p2)`; mirror observables
//! come from the Gaussian marginal obtained by deleting the cavity rows and
//! columns.

use nalgebra::DMatrix;

use crate::coefficients::{derive, DerivedCoefficients, PhysicalParams};
use crate::compiler::{compile, full_generator, MomentEquations};
use crate::dynamics::{check_hurwitz, integrate, periodic_steady_state, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::gaussian::{rotate_local, CovarianceMatrix, QuadratureObservables};
use crate::reduced::{self, criterion, CriterionReport, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coupling {
    /// `η1 = −η2 = η0`.
    #[default]
    Antisymmetric,
    /// Only the first mirror couples to the cavity.
    SingleMirror,
}

pub fn full_equations(coeffs: &DerivedCoefficients, coupling: Coupling) -> Result<MomentEquations> {
    compile(&full_generator(coeffs, 0.0, coupling == Coupling::SingleMirror)?)
}

/// Vacuum cavity and mirrors thermalized with their baths.
pub fn initial_covariance(nbar0: f64) -> CovarianceMatrix {
    let mut v = DMatrix::identity(6, 6) * (nbar0 + 0.5);
    v[(0, 0)] = 0.5;
    v[(1, 1)] = 0.5;
    CovarianceMatrix::new(v).expect("diagonal covariance")
}

/// Mirror block of a three-mode covariance.
pub fn mirror_block(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if v.n_modes() != 3 {
        return Err(Error::UnsupportedModes {
            expected: 3,
            got: v.n_modes(),
        });
    }
    v.marginal(&[1, 2])
}

pub fn evolve_full(
    params: &PhysicalParams,
    grid: &TimeGrid,
    v0: Option<&CovarianceMatrix>,
    coupling: Coupling,
) -> Result<Trajectory> {
    let coeffs = derive(params)?;
    let eqs = full_equations(&coeffs, coupling)?;
    check_hurwitz(&eqs.drift)?;
    let default = initial_covariance(coeffs.nbar0);
    integrate(&eqs, v0.unwrap_or(&default), grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullSteadyState {
    pub covariance: CovarianceMatrix,
    pub mirrors: CovarianceMatrix,
    pub observables: QuadratureObservables,
    pub criterion: CriterionReport,
}

pub fn steady_state_full(params: &PhysicalParams, phase: Phase, coupling: Coupling) -> Result<FullSteadyState> {
    let coeffs = derive(params)?;
    let eqs = full_equations(&coeffs, coupling)?;
    let ss = periodic_steady_state(&eqs)?;
    let v = match phase {
        Phase::Angle(phi) => ss.at_phase(num_complex::Complex64::from_polar(1.0, phi)),
        Phase::Average => ss.dc.clone(),
    };
    let covariance = CovarianceMatrix::symmetrized(v)?;
    let mirrors = mirror_block(&covariance)?;
    let observables = QuadratureObservables::from_covariance(&mirrors)?;
    let vbar = rotate_local(&mirrors, observables.theta)?;
    let criterion = criterion(&vbar, coeffs.nbar0)?;
    Ok(FullSteadyState {
        covariance,
        mirrors,
        observables,
        criterion,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticComparison {
    pub times: Vec<f64>,
    /// `|δP̄²₋(full) − δP̄²₋(reduced)|` at each sample.
    pub deviation: Vec<f64>,
    pub max_deviation: f64,
    pub steady_full: f64,
    pub steady_reduced: f64,
    /// `|full − reduced| / reduced` of the steady `δP̄²₋` at phase `+1`.
    pub steady_relative_deviation: f64,
}

pub fn compare_adiabatic(params: &PhysicalParams, grid: &TimeGrid) -> Result<AdiabaticComparison> {
    let full = evolve_full(params, grid, None, Coupling::Antisymmetric)?;
    let red = reduced::evolve(params, grid)?;
    let deviation: Vec<f64> = full
        .observables
        .iter()
        .zip(&red.observables)
        .map(|(a, b)| (a.dp2_minus - b.dp2_minus).abs())
        .collect();
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    let (steady_full, steady_reduced) = steady_dp2_pair(params)?;
    Ok(AdiabaticComparison {
        times: full.times,
        deviation,
        max_deviation,
        steady_full,
        steady_reduced,
        steady_relative_deviation: (steady_full - steady_reduced).abs() / steady_reduced,
    })
}

/// Steady `δP̄²₋` at phase `+1` from the full and the reduced model.
pub fn steady_dp2_pair(params: &PhysicalParams) -> Result<(f64, f64)> {
    let full = steady_state_full(params, Phase::PLUS, Coupling::Antisymmetric)?;
    let red = reduced::steady_state(params, Phase::PLUS)?;
    Ok((full.criterion.dp2_minus, red.criterion.dp2_minus))
}
