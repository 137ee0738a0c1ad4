//! Closed-form references and brute-force solvers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;
use sqzmirror::coefficients::{DerivedCoefficients, PhysicalParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `1/(κ + i x)`
fn res(kappa: f64, x: f64) -> Complex64 {
    c(kappa, x).inv()
}

/// `(ξ⁺, ξ⁻)` at `omega_k` and time `t`, written out term by term.
pub fn xi_pm(k: &DerivedCoefficients, omega_k: f64, t: f64) -> (Complex64, Complex64) {
    let p = &k.params;
    let a = k.alpha;
    let f = a.norm_sqr() * k.n_sq + a * a * k.m_sq * (I * 2.0 * p.delta * t).exp();
    let g = a.norm_sqr() + f.conj();
    let plus = f * res(p.kappa, p.delta + omega_k) + g * res(p.kappa, -(p.delta - omega_k));
    let minus = f * res(p.kappa, p.delta - omega_k) + g * res(p.kappa, -(p.delta + omega_k));
    (plus, minus)
}

/// `ξʳ + iξⁱ`
pub fn xi(k: &DerivedCoefficients, t: f64) -> Complex64 {
    let p = &k.params;
    let (plus, minus) = xi_pm(k, p.omega_m, t);
    (minus + plus.conj()) * p.eta0 * p.eta0
}

fn zeta(k: &DerivedCoefficients, sign: f64) -> Complex64 {
    let p = &k.params;
    let pre = 2.0 * p.eta0 * p.eta0 * k.alpha.norm_sqr();
    pre * (res(p.kappa, -(p.delta + p.omega_m)) + sign * res(p.kappa, p.delta - p.omega_m))
}

pub fn zeta_minus(k: &DerivedCoefficients) -> Complex64 {
    zeta(k, -1.0)
}

pub fn zeta_plus(k: &DerivedCoefficients) -> Complex64 {
    zeta(k, 1.0)
}

/// `(ζ̄₊, ζ̄₋)`
pub fn zeta_bar(k: &DerivedCoefficients) -> (Complex64, Complex64) {
    let p = &k.params;
    let pre = 2.0 * p.eta0 * p.eta0 * k.alpha * k.alpha;
    let (a, b) = (res(p.kappa, p.delta + p.omega_m), res(p.kappa, p.delta - p.omega_m));
    (pre * (a + b), pre * (a - b))
}

pub fn phi(k: &DerivedCoefficients) -> f64 {
    k.params.gamma_m * (2.0 * k.nbar0 + 1.0)
}

/// Drift of `(V11, V22, V12)`.
pub fn m3(k: &DerivedCoefficients) -> DMatrix<f64> {
    let (g, w) = (k.params.gamma_m, k.params.omega_m);
    let z = zeta_minus(k);
    DMatrix::from_row_slice(
        3,
        3,
        &[
            -2.0 * g,
            0.0,
            2.0 * w,
            0.0,
            2.0 * (2.0 * z.re - g),
            2.0 * (2.0 * z.im - w),
            2.0 * z.im - w,
            w,
            2.0 * (z.re - g),
        ],
    )
}

/// Inhomogeneous part of the three-variable system at time `t`.
pub fn b3(k: &DerivedCoefficients, t: f64) -> DVector<f64> {
    let g = k.params.gamma_m;
    let (f, z, x) = (phi(k), zeta_minus(k), xi(k, t));
    DVector::from_vec(vec![f, f + 2.0 * x.re - f * z.re / g, x.im - f * z.im / (2.0 * g)])
}

/// Printed static part of the drive; its second entry carries the full complex `ζ₊`.
pub fn b0_printed(k: &DerivedCoefficients) -> [Complex64; 3] {
    let g = k.params.gamma_m;
    let (f, zm, zp) = (phi(k), zeta_minus(k), zeta_plus(k));
    [
        c(f, 0.0),
        f + zp - f * zm.re / g,
        c((g * zp.im - f * zm.im) / (2.0 * g), 0.0),
    ]
}

pub fn b1(k: &DerivedCoefficients) -> DVector<f64> {
    let zp = zeta_plus(k);
    DVector::from_vec(vec![0.0, 2.0 * zp.re, zp.im])
}

pub fn b2(k: &DerivedCoefficients) -> DVector<Complex64> {
    let (bp, bm) = zeta_bar(k);
    DVector::from_vec(vec![c(0.0, 0.0), bp, I * bm / 2.0])
}

/// Index pairs of `(V11, V22, V33, V44, V12, V13, V14, V23, V24, V34)`.
pub const TEN: [(usize, usize); 10] = [
    (0, 0),
    (1, 1),
    (2, 2),
    (3, 3),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 2),
    (1, 3),
    (2, 3),
];

/// Drift of the ten independent second moments of the two mirrors.
pub fn m10(k: &DerivedCoefficients) -> DMatrix<f64> {
    let (g, w) = (k.params.gamma_m, k.params.omega_m);
    let z = zeta_minus(k);
    let (zr, zi) = (z.re, z.im);
    let b1 = zi - w;
    #[rustfmt::skip]
    let rows = [
        -2.0 * g, 0.0, 0.0, 0.0, 2.0 * w, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 2.0 * (zr - g), 0.0, 0.0, 2.0 * (zi - w), 0.0, 0.0, -2.0 * zi, -2.0 * zr, 0.0,
        0.0, 0.0, -2.0 * g, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0 * w,
        0.0, 0.0, 0.0, 2.0 * (zr - g), 0.0, 0.0, -2.0 * zi, 0.0, -2.0 * zr, 2.0 * (zi - w),
        zi - w, w, 0.0, 0.0, zr - 2.0 * g, -zi, -zr, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, -2.0 * g, w, w, 0.0, 0.0,
        -zi, 0.0, 0.0, 0.0, -zr, zi - w, zr - 2.0 * g, 0.0, w, 0.0,
        0.0, 0.0, -zi, 0.0, 0.0, zi - w, 0.0, zr - 2.0 * g, w, -zr,
        0.0, -zr, 0.0, -zr, -zi, 0.0, zi - w, b1, 2.0 * (zr - g), -zi,
        0.0, 0.0, zi - w, w, 0.0, -zi, 0.0, -zr, 0.0, zr - 2.0 * g,
    ];
    DMatrix::from_row_slice(10, 10, &rows)
}

pub fn b10(k: &DerivedCoefficients, t: f64) -> DVector<f64> {
    let (f, x) = (phi(k), xi(k, t));
    DVector::from_vec(vec![
        f,
        f + 2.0 * x.re,
        f,
        f + 2.0 * x.re,
        x.im,
        0.0,
        -x.im,
        -x.im,
        -2.0 * x.re,
        x.im,
    ])
}

/// Lyapunov map `V ↦ AV + VAᵀ` in the ten-moment basis.
pub fn lyapunov_in_ten(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(10, 10);
    for (col, &(i, j)) in TEN.iter().enumerate() {
        let mut e = DMatrix::zeros(4, 4);
        e[(i, j)] = 1.0;
        e[(j, i)] = 1.0;
        let image = a * &e + &e * a.transpose();
        for (row, &(k, l)) in TEN.iter().enumerate() {
            out[(row, col)] = image[(k, l)];
        }
    }
    out
}

pub fn ten_of(v: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(10, TEN.iter().map(|&(i, j)| v[(i, j)]))
}

/// A parameter point spread over the ranges the scenarios explore.
pub fn random_params(rng: &mut StdRng) -> PhysicalParams {
    let mut p = PhysicalParams::baseline();
    p.r = rng.random_range(0.0..2.5);
    p.temperature = rng.random_range(0.0..10e-3);
    p.power = 10f64.powf(rng.random_range(-8.0..-5.4));
    p.delta = p.omega_m * rng.random_range(0.5..1.5);
    p.kappa = p.gamma_m / 10f64.powf(rng.random_range(-3.8..-2.0));
    p
}

/// Largest entrywise deviation relative to the largest entry of `b`.
pub fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax()
}

/// Brute-force thermal decay of one oscillator in a truncated Fock basis.
///
/// Integrates `ρ̇ = −i[ω a†a, ρ] + γ(n̄+1)(2aρa† − a†aρ − ρa†a) + γn̄(2a†ρa − aa†ρ − ρaa†)`
/// from the squeezed vacuum `S(s)|0⟩` and returns `(t, ⟨x²⟩, ⟨p²⟩)` every `stride` steps.
pub struct FockDecay {
    pub dim: usize,
    pub omega: f64,
    pub gamma: f64,
    pub nbar: f64,
    pub squeezing: f64,
}

impl FockDecay {
    fn ladder(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
        }
        a
    }

    fn initial(&self) -> DMatrix<Complex64> {
        let t = self.squeezing.tanh();
        let mut psi = DVector::<Complex64>::zeros(self.dim);
        let mut amp = 1.0 / self.squeezing.cosh().sqrt();
        for n in 0..self.dim.div_ceil(2) {
            psi[2 * n] = c(amp, 0.0);
            // c_{2n+2}/c_{2n} = −tanh s · √((2n+1)(2n+2)) / (2(n+1))
            let m = n as f64;
            amp *= -t * ((2.0 * m + 1.0) * (2.0 * m + 2.0)).sqrt() / (2.0 * (m + 1.0));
        }
        &psi * psi.adjoint()
    }

    pub fn run(&self, t_end: f64, n_steps: usize, stride: usize) -> Vec<(f64, f64, f64)> {
        let a = self.ladder();
        let ad = a.adjoint();
        let num = &ad * &a;
        let anti = &a * &ad;
        let (up, down) = (self.gamma * (self.nbar + 1.0), self.gamma * self.nbar);
        let h = num.map(|z| z * self.omega);
        let rhs = |r: &DMatrix<Complex64>| -> DMatrix<Complex64> {
            let comm = (&h * r - r * &h) * (-I);
            let lose = (&a * r * &ad * c(2.0, 0.0) - &num * r - r * &num) * c(up, 0.0);
            let gain = (&ad * r * &a * c(2.0, 0.0) - &anti * r - r * &anti) * c(down, 0.0);
            comm + lose + gain
        };
        let x = (&a + &ad) / c(2f64.sqrt(), 0.0);
        let p = (&a - &ad) / c(0.0, 2f64.sqrt());
        let (x2, p2) = (&x * &x, &p * &p);
        let moments = |t: f64, r: &DMatrix<Complex64>| (t, (&x2 * r).trace().re, (&p2 * r).trace().re);

        let dt = t_end / n_steps as f64;
        let mut rho = self.initial();
        let mut out = vec![moments(0.0, &rho)];
        for k in 1..=n_steps {
            let k1 = rhs(&rho);
            let k2 = rhs(&(&rho + &k1 * c(dt / 2.0, 0.0)));
            let k3 = rhs(&(&rho + &k2 * c(dt / 2.0, 0.0)));
            let k4 = rhs(&(&rho + &k3 * c(dt, 0.0)));
            rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
            if k % stride == 0 {
                out.push(moments(k as f64 * dt, &rho));
            }
        }
        out
    }
}
