//! Compiles a quadratic Hamiltonian plus bilinear dissipators into Gaussian
//! moment equations `dV/dt = A V + V Aᵀ + D(t)`, `d⟨X⟩/dt = A⟨X⟩ + b`.
//!
//! A dissipator `c·(2 L ρ M − M L ρ − ρ M L)` with `L = lᵀX`, `M = mᵀX`
//! contributes `i c U (l mᵀ − m lᵀ)` to the drift and
//! `c U (m lᵀ + l mᵀ) Uᵀ` to the diffusion. A Hamiltonian `½ XᵀGX + hᵀX`
//! contributes `U G` to the drift and `U h` to the mean drive.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::coefficients::DerivedCoefficients;
use crate::error::{Error, Result};
use crate::gaussian::SymplecticForm;
use crate::harmonic::Harmonic;

/// Relative size of an imaginary or anti-hermitian residue tolerated as round-off.
const ADJOINT_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One term `rate·(2 L ρ M − M L ρ − ρ M L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub rate: Harmonic,
    pub left: DVector<Complex64>,
    pub right: DVector<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub n_modes: usize,
    /// `G` in `H = ½ XᵀGX`.
    pub hamiltonian: DMatrix<f64>,
    /// `h` in the linear Hamiltonian part `hᵀX`.
    pub linear: DVector<f64>,
    pub dissipators: Vec<Dissipator>,
    /// Carrier of every harmonic rate (rad/s).
    pub frequency: f64,
}

impl GeneratorSpec {
    pub fn new(n_modes: usize) -> Self {
        let d = 2 * n_modes;
        Self {
            n_modes,
            hamiltonian: DMatrix::zeros(d, d),
            linear: DVector::zeros(d),
            dissipators: Vec::new(),
            frequency: 0.0,
        }
    }

    pub fn dissipator(&mut self, rate: Harmonic, left: &DVector<Complex64>, right: &DVector<Complex64>) {
        self.dissipators.push(Dissipator {
            rate,
            left: left.clone(),
            right: right.clone(),
        });
    }

    /// Adds `γ[(n̄+1) Ď_{a,a†} + n̄ Ď_{a†,a}]` for the ladder vector `a`.
    pub fn thermal_bath(&mut self, a: &DVector<Complex64>, gamma: f64, nbar: f64) {
        let ad = a.conjugate();
        self.dissipator(Harmonic::real(gamma * (nbar + 1.0)), a, &ad);
        self.dissipator(Harmonic::real(gamma * nbar), &ad, a);
    }
}

/// Linear second-moment equations with a harmonically modulated diffusion
/// `D(t) = D_dc + D_up e^{iωt} + c.c.`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEquations {
    pub drift: DMatrix<f64>,
    pub diffusion_dc: DMatrix<f64>,
    pub diffusion_up: DMatrix<Complex64>,
    pub frequency: f64,
    /// Constant drive of the mean equations.
    pub drive: DVector<f64>,
}

impl MomentEquations {
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn is_static(&self) -> bool {
        self.frequency == 0.0 || self.diffusion_up.iter().all(|z| z.norm() == 0.0)
    }

    pub fn period(&self) -> Option<f64> {
        (!self.is_static()).then(|| 2.0 * std::f64::consts::PI / self.frequency.abs())
    }

    pub fn diffusion(&self, t: f64) -> DMatrix<f64> {
        let mut d = self.diffusion_dc.clone();
        self.add_harmonic_diffusion(t, &mut d);
        d
    }

    /// Adds `D_up e^{iωt} + c.c.` into `out`.
    pub fn add_harmonic_diffusion(&self, t: f64, out: &mut DMatrix<f64>) {
        if self.is_static() {
            return;
        }
        let e = Complex64::from_polar(2.0, self.frequency * t);
        out.zip_apply(&self.diffusion_up, |o, z| *o += (z * e).re);
    }

    /// Writes `A V + V Aᵀ + D(t)` into `out` for symmetric `v`.
    pub fn rhs(&self, t: f64, v: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.gemm(1.0, &self.drift, v, 0.0);
        let n = out.nrows();
        for i in 0..n {
            for j in i..n {
                let s = out[(i, j)] + out[(j, i)];
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        *out += &self.diffusion_dc;
        self.add_harmonic_diffusion(t, out);
    }
}

pub fn compile(spec: &GeneratorSpec) -> Result<MomentEquations> {
    let d = 2 * spec.n_modes;
    if spec.hamiltonian.shape() != (d, d) || spec.linear.len() != d {
        return Err(Error::Dimension(format!(
            "generator with {} modes needs a {d}x{d} Hamiltonian and length-{d} linear part",
            spec.n_modes
        )));
    }
    let asym = (&spec.hamiltonian - spec.hamiltonian.transpose()).amax();
    if asym > ADJOINT_TOL * spec.hamiltonian.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::NonSelfAdjoint(format!(
            "Hamiltonian matrix is not symmetric ({asym:e})"
        )));
    }
    let u = SymplecticForm::new(spec.n_modes).matrix();
    let uc = u.map(|x| Complex64::new(x, 0.0));

    let zero = || DMatrix::<Complex64>::zeros(d, d);
    let (mut drift_dc, mut drift_up, mut drift_down) = (zero(), zero(), zero());
    let (mut diff_dc, mut diff_up, mut diff_down) = (zero(), zero(), zero());
    for term in &spec.dissipators {
        if term.left.len() != d || term.right.len() != d {
            return Err(Error::Dimension(format!("dissipator vectors must have length {d}")));
        }
        let lm = &term.left * term.right.transpose();
        let ml = lm.transpose();
        let drift_part = &uc * (&lm - &ml) * I;
        let diff_part = &uc * (&ml + &lm) * uc.transpose();
        let r = term.rate;
        drift_dc += &drift_part * r.dc;
        drift_up += &drift_part * r.up;
        drift_down += &drift_part * r.down;
        diff_dc += &diff_part * r.dc;
        diff_up += &diff_part * r.up;
        diff_down += &diff_part * r.down;
    }
    let hamiltonian_drift = &u * &spec.hamiltonian;
    let drift_scale = drift_dc.camax().max(hamiltonian_drift.amax()).max(f64::MIN_POSITIVE);
    let diff_scale = diff_dc.camax().max(diff_up.camax()).max(f64::MIN_POSITIVE);

    let drift_imag = drift_dc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if drift_imag > ADJOINT_TOL * drift_scale {
        return Err(Error::NonSelfAdjoint(format!(
            "drift has imaginary part {drift_imag:e}"
        )));
    }
    let diff_imag = diff_dc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if diff_imag > ADJOINT_TOL * diff_scale {
        return Err(Error::NonSelfAdjoint(format!(
            "diffusion has imaginary part {diff_imag:e}"
        )));
    }
    let mismatch = (&diff_down - diff_up.conjugate()).camax();
    if mismatch > ADJOINT_TOL * diff_scale {
        return Err(Error::NonSelfAdjoint(format!(
            "modulated diffusion lacks its conjugate partner ({mismatch:e})"
        )));
    }
    let mismatch = (&drift_down - drift_up.conjugate()).camax();
    if mismatch > ADJOINT_TOL * drift_scale {
        return Err(Error::NonSelfAdjoint(format!(
            "modulated drift lacks its conjugate partner ({mismatch:e})"
        )));
    }
    let drift_mod = drift_up.camax();
    if drift_mod > ADJOINT_TOL * drift_scale {
        return Err(Error::UnsupportedGenerator(format!(
            "drift carries a modulated part of size {drift_mod:e}"
        )));
    }

    let drift = hamiltonian_drift + drift_dc.map(|z| z.re);
    let diffusion_dc = diff_dc.map(|z| z.re);
    let diffusion_dc = (&diffusion_dc + diffusion_dc.transpose()) * 0.5;
    let diffusion_up = (&diff_up + diff_up.transpose()) * Complex64::new(0.5, 0.0);
    Ok(MomentEquations {
        drift,
        diffusion_dc,
        diffusion_up,
        frequency: spec.frequency,
        drive: &u * &spec.linear,
    })
}

/// Annihilation operator of mode `k` as a coefficient vector over `X`.
pub fn annihilation(n_modes: usize, k: usize) -> DVector<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(2 * n_modes);
    v[2 * k] = Complex64::new(s, 0.0);
    v[2 * k + 1] = Complex64::new(0.0, s);
    v
}

/// Accumulates `H = Σ c (uᵀX)(vᵀX) + h.c.-complete terms` into `G` with `H = ½ XᵀGX`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    acc: DMatrix<Complex64>,
}

impl QuadraticForm {
    pub fn new(n_modes: usize) -> Self {
        Self {
            acc: DMatrix::zeros(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn add(&mut self, coeff: Complex64, u: &DVector<Complex64>, v: &DVector<Complex64>) {
        self.acc += u * v.transpose() * coeff;
    }

    /// `G`, failing if the accumulated operator is not hermitian.
    pub fn finish(self) -> Result<DMatrix<f64>> {
        let g = &self.acc + self.acc.transpose();
        let imag = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > ADJOINT_TOL * g.camax().max(f64::MIN_POSITIVE) {
            return Err(Error::NonSelfAdjoint(format!(
                "Hamiltonian has imaginary part {imag:e}"
            )));
        }
        Ok(g.map(|z| z.re))
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Two identical mirrors coupled through the eliminated cavity, in `(a1, a2)`.
///
/// The Hamiltonian uses the cavity shifts at time `t`; they are in fact constant.
pub fn reduced_generator(coeffs: &DerivedCoefficients, t: f64) -> Result<GeneratorSpec> {
    let p = &coeffs.params;
    let e2 = p.eta0 * p.eta0;
    let a1 = annihilation(2, 0);
    let a2 = annihilation(2, 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ap = (&a1 + &a2) * re(s);
    let am = (&a1 - &a2) * re(s);
    let (apd, amd) = (ap.conjugate(), am.conjugate());

    let (xp, xm) = coeffs.xi_pm_harmonic(p.omega_m);
    let w = coeffs.modulation_frequency();
    let (xp_t, xm_t) = (xp.eval(t, w), xm.eval(t, w));
    let omega_minus = p.omega_m - 2.0 * e2 * (xp_t + xm_t).im;
    let sq = I * e2 * (xm_t - xp_t.conj());

    let mut h = QuadraticForm::new(2);
    h.add(re(p.omega_m), &apd, &ap);
    h.add(re(omega_minus), &amd, &am);
    h.add(sq, &am, &am);
    h.add(sq.conj(), &amd, &amd);

    let mut spec = GeneratorSpec::new(2);
    spec.hamiltonian = h.finish()?;
    spec.frequency = w;
    spec.thermal_bath(&a1, p.gamma_m, coeffs.nbar0);
    spec.thermal_bath(&a2, p.gamma_m, coeffs.nbar0);
    spec.dissipator((xp.conj() + xp) * e2, &am, &amd);
    spec.dissipator((xm.conj() + xm) * e2, &amd, &am);
    spec.dissipator((xp.conj() + xm) * e2, &am, &am);
    spec.dissipator((xm.conj() + xp) * e2, &amd, &amd);
    Ok(spec)
}

/// Linearized cavity plus two mirrors, in `(c, a1, a2)`.
///
/// The mirrors couple with opposite signs `η1 = −η2 = η0`; with `single_mirror`
/// the second mirror is decoupled instead. The generator has no explicit time
/// dependence beyond the harmonic bath, so `t` is accepted for symmetry with
/// [`reduced_generator`] only.
pub fn full_generator(coeffs: &DerivedCoefficients, _t: f64, single_mirror: bool) -> Result<GeneratorSpec> {
    let p = &coeffs.params;
    let c = annihilation(3, 0);
    let cd = c.conjugate();
    let mirrors = [annihilation(3, 1), annihilation(3, 2)];
    let etas = [p.eta0, if single_mirror { 0.0 } else { -p.eta0 }];
    let field = &cd * coeffs.alpha + &c * coeffs.alpha.conj();

    let mut h = QuadraticForm::new(3);
    h.add(re(p.delta), &cd, &c);
    for (a, eta) in mirrors.iter().zip(etas) {
        let ad = a.conjugate();
        h.add(re(p.omega_m), &ad, a);
        h.add(re(eta), &(a + &ad), &field);
    }

    let mut spec = GeneratorSpec::new(3);
    spec.hamiltonian = h.finish()?;
    spec.frequency = coeffs.modulation_frequency();
    for a in &mirrors {
        spec.thermal_bath(a, p.gamma_m, coeffs.nbar0);
    }
    spec.thermal_bath(&c, p.kappa, coeffs.n_sq);
    let squeeze = re(-p.kappa * coeffs.m_sq);
    spec.dissipator(
        Harmonic {
            up: squeeze,
            ..Harmonic::ZERO
        },
        &c,
        &c,
    );
    spec.dissipator(
        Harmonic {
            down: squeeze,
            ..Harmonic::ZERO
        },
        &cd,
        &cd,
    );
    Ok(spec)
}
