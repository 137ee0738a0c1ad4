//! Experiment-level parameters and every coefficient derived from them.
//!
//! All quantities are SI with angular frequencies in rad/s; `ħ` and `k_B`
//! appear explicitly.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::Harmonic;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// Default prefactor `c` in the drive amplitude `Ω = c·sqrt(Pκ/(ħω_L))`.
pub const DEFAULT_DRIVE_PREFACTOR: f64 = 2.0;

/// Inputs of one simulated experiment. Frequencies and rates are angular (rad/s).
///
/// The coherent drive and the squeezed field share a single detuning `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_c: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub eta0: f64,
    pub power: f64,
    pub delta: f64,
    pub r: f64,
    pub temperature: f64,
    pub drive_prefactor: f64,
}

impl PhysicalParams {
    /// Microwave electromechanics operating point used throughout the figures.
    pub fn baseline() -> Self {
        let kappa = 2.0 * PI * 6.2e6;
        let omega_m = 2.0 * PI * 32.1e6;
        Self {
            omega_c: 2.0 * PI * 6.98e9,
            kappa,
            omega_m,
            gamma_m: 15e-5 * kappa,
            eta0: 2.0 * PI * 39.0,
            power: 4e-6,
            delta: omega_m,
            r: 1.0,
            temperature: 0.0,
            drive_prefactor: DEFAULT_DRIVE_PREFACTOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_c", self.omega_c),
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("eta0", self.eta0),
            ("power", self.power),
            ("delta", self.delta),
            ("r", self.r),
            ("temperature", self.temperature),
            ("drive_prefactor", self.drive_prefactor),
        ];
        for (name, x) in finite {
            if !x.is_finite() {
                return Err(param(name, "must be finite"));
            }
        }
        for (name, x) in [
            ("omega_c", self.omega_c),
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
        ] {
            if x <= 0.0 {
                return Err(param(name, "must be positive"));
            }
        }
        for (name, x) in [
            ("gamma_m", self.gamma_m),
            ("power", self.power),
            ("temperature", self.temperature),
            ("r", self.r),
        ] {
            if x < 0.0 {
                return Err(param(name, "must be non-negative"));
            }
        }
        if self.omega_c - self.delta <= 0.0 {
            return Err(param("delta", "laser frequency omega_c - delta must be positive"));
        }
        Ok(())
    }

    pub fn laser_frequency(&self) -> f64 {
        self.omega_c - self.delta
    }
}

fn param(name: &'static str, reason: &str) -> Error {
    Error::Parameter {
        name,
        reason: reason.to_string(),
    }
}

/// Bose-Einstein occupation of a mode at angular frequency `omega` and temperature `temperature`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(param("omega", "must be positive"));
    }
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(param("temperature", "must be finite and non-negative"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Every coefficient entering the moment equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    pub params: PhysicalParams,
    pub omega_l: f64,
    /// Drive amplitude Ω (rad/s).
    pub drive: f64,
    /// Steady intracavity amplitude `Ω/(iκ - Δ)`.
    pub alpha: Complex64,
    pub nbar0: f64,
    /// `sinh² r`
    pub n_sq: f64,
    /// `cosh r sinh r`
    pub m_sq: f64,
    /// `γ₀(2n̄₀ + 1)`
    pub phi: f64,
    pub zeta_minus: Complex64,
    pub zeta_plus: Complex64,
    pub zeta_bar_plus: Complex64,
    pub zeta_bar_minus: Complex64,
}

pub fn derive(params: &PhysicalParams) -> Result<DerivedCoefficients> {
    params.validate()?;
    let p = params;
    let omega_l = p.laser_frequency();
    let drive = p.drive_prefactor * (p.power * p.kappa / (HBAR * omega_l)).sqrt();
    let alpha = Complex64::new(drive, 0.0) / Complex64::new(-p.delta, p.kappa);
    let nbar0 = thermal_occupation(p.omega_m, p.temperature)?;
    let (sh, ch) = (p.r.sinh(), p.r.cosh());
    let a2 = alpha.norm_sqr();
    let g = 2.0 * p.eta0 * p.eta0;
    let lower = Complex64::new(p.kappa, -(p.delta + p.omega_m)).inv();
    let upper = Complex64::new(p.kappa, p.delta - p.omega_m).inv();
    let bar_sum = Complex64::new(p.kappa, p.delta + p.omega_m).inv();
    let alpha_sq = alpha * alpha;
    Ok(DerivedCoefficients {
        params: *p,
        omega_l,
        drive,
        alpha,
        nbar0,
        n_sq: sh * sh,
        m_sq: ch * sh,
        phi: p.gamma_m * (2.0 * nbar0 + 1.0),
        zeta_minus: (lower - upper) * (g * a2),
        zeta_plus: (lower + upper) * (g * a2),
        zeta_bar_plus: (bar_sum + upper) * alpha_sq * g,
        zeta_bar_minus: (bar_sum - upper) * alpha_sq * g,
    })
}

/// Both cavity-response coefficients `(ξ⁺, ξ⁻)` for a mirror at `omega_k`, at time `t`.
pub fn xi_pm(params: &PhysicalParams, omega_k: f64, t: f64) -> Result<(Complex64, Complex64)> {
    Ok(derive(params)?.xi_pm(omega_k, t))
}

impl DerivedCoefficients {
    pub fn alpha_sq_norm(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// Carrier `2Δ` of the squeezed-bath modulation.
    pub fn modulation_frequency(&self) -> f64 {
        2.0 * self.params.delta
    }

    /// Period `π/Δ` of the modulation, `None` when Δ = 0.
    pub fn period(&self) -> Option<f64> {
        (self.params.delta != 0.0).then(|| PI / self.params.delta.abs())
    }

    /// `ϝ = N|α|² + Mα² e^{2iΔt}` as a harmonic.
    pub fn anomalous_photon(&self) -> Harmonic {
        Harmonic {
            dc: Complex64::new(self.n_sq * self.alpha_sq_norm(), 0.0),
            up: self.alpha * self.alpha * self.m_sq,
            down: Complex64::new(0.0, 0.0),
        }
    }

    /// `(ξ⁺, ξ⁻)` for a mirror at `omega_k`, as harmonics in `2Δ`.
    pub fn xi_pm_harmonic(&self, omega_k: f64) -> (Harmonic, Harmonic) {
        let p = &self.params;
        let f = self.anomalous_photon();
        let photons = Harmonic::real(self.alpha_sq_norm()) + f.conj();
        let res = |re: f64, im: f64| Complex64::new(re, im).inv();
        let xi_plus = f * res(p.kappa, p.delta + omega_k) + photons * res(p.kappa, -(p.delta - omega_k));
        let xi_minus = f * res(p.kappa, p.delta - omega_k) + photons * res(p.kappa, -(p.delta + omega_k));
        (xi_plus, xi_minus)
    }

    pub fn xi_pm(&self, omega_k: f64, t: f64) -> (Complex64, Complex64) {
        let w = self.modulation_frequency();
        let (xp, xm) = self.xi_pm_harmonic(omega_k);
        (xp.eval(t, w), xm.eval(t, w))
    }

    /// `ξʳ + iξⁱ = η₀²(ξ₀⁻ + ξ₀⁺*)`, the cavity-induced drive of the relative mode.
    pub fn xi_drive(&self, t: f64) -> Complex64 {
        let (xp, xm) = self.xi_pm(self.params.omega_m, t);
        (xm + xp.conj()) * (self.params.eta0 * self.params.eta0)
    }

    /// Copy with `N` and `M` replaced by arbitrary weights.
    ///
    /// Everything downstream is affine in `(N, M)`, so compiling at unit weights
    /// separates the squeezing contributions. The result is not a physical bath
    /// unless `M² = N(N+1)`.
    pub fn with_squeezing_weights(&self, n_sq: f64, m_sq: f64) -> Self {
        Self { n_sq, m_sq, ..*self }
    }
}
