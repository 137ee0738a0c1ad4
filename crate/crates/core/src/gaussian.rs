//! Symplectic linear algebra on Gaussian covariance matrices.
//!
//! Quadratures are ordered `(x1, p1, x2, p2, ...)` with `x = (a + a†)/√2`,
//! `p = (a - a†)/(√2 i)`, so that `[X_i, X_j] = i U_ij` and the vacuum has
//! covariance `I/2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Lower bound slack on symplectic eigenvalues before a state is reported unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-6;

const SYMMETRY_TOL: f64 = 1e-12;

/// Block-diagonal symplectic form `U = diag(J, ..., J)` with `J = [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    pub n_modes: usize,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.n_modes;
        let mut u = DMatrix::zeros(n, n);
        for k in 0..self.n_modes {
            u[(2 * k, 2 * k + 1)] = 1.0;
            u[(2 * k + 1, 2 * k)] = -1.0;
        }
        u
    }
}

/// Real symmetric `2n x 2n` covariance of quadrature fluctuations.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `entries`, rejecting odd or non-square shapes and asymmetric input.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square with even positive dimension, got {r}x{c}"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Dimension("covariance has non-finite entries".into()));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Dimension(format!(
                "covariance is not symmetric (max |V - V^T| = {asym:e})"
            )));
        }
        Ok(Self {
            n_modes: r / 2,
            entries,
        })
    }

    /// `dim × dim` row-major entries, `dim = 2 n_modes`.
    pub fn from_row_slice(n_modes: usize, entries: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{n_modes} modes need {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Symmetrizes `entries` before wrapping. Used by integrators after each step.
    pub fn symmetrized(entries: DMatrix<f64>) -> Result<Self> {
        let sym = (&entries + entries.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(n_modes, 0.0)
    }

    /// Product of thermal states with occupation `nbar` in every mode.
    pub fn thermal(n_modes: usize, nbar: f64) -> Self {
        Self {
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes) * (nbar + 0.5),
        }
    }

    /// Two-mode squeezed vacuum with squeezing `s`.
    pub fn two_mode_squeezed_vacuum(s: f64) -> Self {
        let c = (2.0 * s).cosh() / 2.0;
        let sh = (2.0 * s).sinh() / 2.0;
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = c;
        }
        m[(0, 2)] = sh;
        m[(2, 0)] = sh;
        m[(1, 3)] = -sh;
        m[(3, 1)] = -sh;
        Self { n_modes: 2, entries: m }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Gaussian marginal over the listed modes (row/column selection).
    pub fn marginal(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() || modes.iter().any(|&m| m >= self.n_modes) {
            return Err(Error::Dimension(format!(
                "marginal modes {modes:?} out of range for {} modes",
                self.n_modes
            )));
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let n = idx.len();
        let sub = DMatrix::from_fn(n, n, |i, j| self.entries[(idx[i], idx[j])]);
        Ok(Self {
            n_modes: modes.len(),
            entries: sub,
        })
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        symplectic_eigenvalues(self)[0]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.min_symplectic_eigenvalue() >= 0.5 - tol
    }
}

/// Symplectic eigenvalues of `V`, ascending, one per mode.
///
/// The eigenvalues of `U V` come in pairs `±iν`; their moduli are sorted and
/// each adjacent pair is averaged.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Vec<f64> {
    let u = SymplecticForm::new(v.n_modes).matrix();
    let uv = u * v.matrix();
    let mut moduli: Vec<f64> = uv.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.total_cmp(b));
    moduli.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
}

fn require_two_modes(v: &CovarianceMatrix) -> Result<()> {
    if v.n_modes != 2 {
        return Err(Error::UnsupportedModes {
            expected: 2,
            got: v.n_modes,
        });
    }
    Ok(())
}

/// `Λ V Λ` with `Λ = diag(1, 1, 1, -1)`.
pub fn partial_transpose(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    require_two_modes(v)?;
    let mut m = v.entries.clone();
    for k in 0..4 {
        if k != 3 {
            m[(3, k)] = -m[(3, k)];
            m[(k, 3)] = -m[(k, 3)];
        }
    }
    Ok(CovarianceMatrix { n_modes: 2, entries: m })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativity {
    pub value: f64,
    /// Symplectic eigenvalues of the partial transpose, ascending.
    pub nu_tilde: [f64; 2],
    /// Minimum symplectic eigenvalue of `V` itself when it falls below `1/2 - tol`.
    pub physicality_warning: Option<f64>,
}

/// Logarithmic negativity `max(0, -log2(2 min ν̃))` of a two-mode state.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<Negativity> {
    let pt = partial_transpose(v)?;
    let nu = symplectic_eigenvalues(&pt);
    let nu_tilde = [nu[0], nu[1]];
    let value = (-(2.0 * nu[0]).log2()).max(0.0);
    let min_nu = v.min_symplectic_eigenvalue();
    let physicality_warning = (min_nu < 0.5 - PHYSICALITY_TOL).then_some(min_nu);
    Ok(Negativity {
        value,
        nu_tilde,
        physicality_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAngle {
    /// `arg <a1 a1>` in `(-π, π]`.
    pub theta: f64,
    /// Set when `<a1 a1> = 0`; `theta` is then 0.
    pub degenerate: bool,
}

/// Phase of `<a1 a1> = (V11 - V22 + 2i V12) / 2`.
pub fn rotation_angle(v: &CovarianceMatrix) -> Result<RotationAngle> {
    require_two_modes(v)?;
    let re = v.get(0, 0) - v.get(1, 1);
    let im = 2.0 * v.get(0, 1);
    if re == 0.0 && im == 0.0 {
        return Ok(RotationAngle {
            theta: 0.0,
            degenerate: true,
        });
    }
    let mut theta = im.atan2(re);
    if theta <= -std::f64::consts::PI {
        theta = std::f64::consts::PI;
    }
    Ok(RotationAngle {
        theta,
        degenerate: false,
    })
}

/// Applies the same local phase rotation `a_j -> a_j e^{-iθ/2}` to both modes.
pub fn rotate_local(v: &CovarianceMatrix, theta: f64) -> Result<CovarianceMatrix> {
    require_two_modes(v)?;
    let (s, c) = (theta / 2.0).sin_cos();
    let mut r = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let o = 2 * k;
        r[(o, o)] = c;
        r[(o, o + 1)] = s;
        r[(o + 1, o)] = -s;
        r[(o + 1, o + 1)] = c;
    }
    CovarianceMatrix::symmetrized(&r * v.matrix() * r.transpose())
}

/// Variances of the centre-of-mass (`+`) and relative (`-`) quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeVariances {
    pub dq2_minus: f64,
    pub dp2_minus: f64,
    pub dq2_plus: f64,
    pub dp2_plus: f64,
}

pub fn relative_mode_variances(vbar: &CovarianceMatrix) -> Result<ModeVariances> {
    require_two_modes(vbar)?;
    let out = ModeVariances {
        dq2_minus: vbar.get(0, 0) - vbar.get(0, 2),
        dp2_minus: vbar.get(1, 1) - vbar.get(1, 3),
        dq2_plus: vbar.get(0, 0) + vbar.get(0, 2),
        dp2_plus: vbar.get(1, 1) + vbar.get(1, 3),
    };
    let min = out.dq2_minus.min(out.dp2_minus).min(out.dq2_plus).min(out.dp2_plus);
    if min < -PHYSICALITY_TOL {
        return Err(Error::Physicality(format!("negative quadrature variance {min:e}")));
    }
    Ok(out)
}

/// Mean phonon number `(V_xx + V_pp - 1)/2` of `mode` (zero-mean fluctuations).
pub fn mean_phonon(v: &CovarianceMatrix, mode: usize) -> Result<f64> {
    if mode >= v.n_modes {
        return Err(Error::Dimension(format!(
            "mode {mode} out of range for {} modes",
            v.n_modes
        )));
    }
    let n = (v.get(2 * mode, 2 * mode) + v.get(2 * mode + 1, 2 * mode + 1) - 1.0) / 2.0;
    if n < -PHYSICALITY_TOL {
        return Err(Error::Physicality(format!(
            "negative phonon number {n:e} in mode {mode}"
        )));
    }
    Ok(n)
}

/// Everything the figures plot, derived from one two-mode covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureObservables {
    pub theta: f64,
    pub degenerate_angle: bool,
    pub dp2_minus: f64,
    pub dq2_minus: f64,
    pub dp2_plus: f64,
    pub dq2_plus: f64,
    /// Relative-mode variances in the unrotated frame.
    pub dp2_minus_lab: f64,
    pub dq2_minus_lab: f64,
    pub e_n: f64,
    pub nu_tilde: [f64; 2],
    pub phonon: Vec<f64>,
    pub min_symplectic: f64,
}

impl QuadratureObservables {
    pub fn from_covariance(v: &CovarianceMatrix) -> Result<Self> {
        let angle = rotation_angle(v)?;
        let vbar = rotate_local(v, angle.theta)?;
        let rot = relative_mode_variances(&vbar)?;
        let lab = relative_mode_variances(v)?;
        let neg = log_negativity(v)?;
        let phonon = (0..2).map(|k| mean_phonon(v, k)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            theta: angle.theta,
            degenerate_angle: angle.degenerate,
            dp2_minus: rot.dp2_minus,
            dq2_minus: rot.dq2_minus,
            dp2_plus: rot.dp2_plus,
            dq2_plus: rot.dq2_plus,
            dp2_minus_lab: lab.dp2_minus,
            dq2_minus_lab: lab.dq2_minus,
            e_n: neg.value,
            nu_tilde: neg.nu_tilde,
            phonon,
            min_symplectic: v.min_symplectic_eigenvalue(),
        })
    }

    /// `(ν̃1, ν̃2) = (sqrt(δQ̄²₊ δP̄²₋), sqrt(δP̄²₊ δQ̄²₋))` for block-symmetric states.
    pub fn nu_tilde_from_variances(&self) -> (f64, f64) {
        (
            (self.dq2_plus * self.dp2_minus).max(0.0).sqrt(),
            (self.dp2_plus * self.dq2_minus).max(0.0).sqrt(),
        )
    }
}
