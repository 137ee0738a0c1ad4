use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::expm::expm_action;
use crate::compiler::MomentEquations;
use crate::error::{Error, Result};

/// Returns the spectral abscissa of `m`, or an instability error naming the
/// first eigenvalue with non-negative real part.
pub fn check_hurwitz(m: &DMatrix<f64>) -> Result<f64> {
    let eig = m.complex_eigenvalues();
    let worst = eig
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .ok_or_else(|| Error::Dimension("empty drift matrix".into()))?;
    if !(worst.re < 0.0) {
        return Err(Error::Unstable {
            re: worst.re,
            im: worst.im,
        });
    }
    Ok(worst.re)
}

/// `dy/dt = M y + b_dc + b_up e^{iωt} + c.c.`
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSystem {
    pub matrix: DMatrix<f64>,
    pub b_dc: DVector<f64>,
    pub b_up: DVector<Complex64>,
    pub omega: f64,
}

/// `y(t) = dc + up e^{iωt} + c.c.`
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicAffineState {
    pub dc: DVector<f64>,
    pub up: DVector<Complex64>,
    pub omega: f64,
}

impl PeriodicAffineState {
    pub fn at(&self, t: f64) -> DVector<f64> {
        self.at_phase(Complex64::from_polar(1.0, self.omega * t))
    }

    /// Value where `e^{iωt}` equals `phase`.
    pub fn at_phase(&self, phase: Complex64) -> DVector<f64> {
        &self.dc + self.up.map(|z| 2.0 * (z * phase).re)
    }
}

impl AffineSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn drive(&self, t: f64) -> DVector<f64> {
        let e = Complex64::from_polar(2.0, self.omega * t);
        &self.b_dc + self.b_up.map(|z| (z * e).re)
    }

    /// Writes `M y + b(t)` into `out`; both are `n x 1`.
    pub fn rhs(&self, t: f64, y: &DMatrix<f64>, out: &mut DMatrix<f64>) {
        out.gemm(1.0, &self.matrix, y, 0.0);
        let e = Complex64::from_polar(2.0, self.omega * t);
        for i in 0..self.dim() {
            out[(i, 0)] += self.b_dc[i] + (self.b_up[i] * e).re;
        }
    }

    /// Unique periodic solution; requires a Hurwitz matrix.
    pub fn periodic_steady_state(&self) -> Result<PeriodicAffineState> {
        check_hurwitz(&self.matrix)?;
        self.particular_solution()
    }

    /// The periodic particular solution, which exists whenever `M` and
    /// `M − iωI` are invertible.
    pub fn particular_solution(&self) -> Result<PeriodicAffineState> {
        let n = self.dim();
        let dc = self
            .matrix
            .clone()
            .lu()
            .solve(&(-&self.b_dc))
            .ok_or_else(|| Error::Singular("drift matrix".into()))?;
        let shifted =
            self.matrix.map(|x| Complex64::new(x, 0.0)) - DMatrix::identity(n, n) * Complex64::new(0.0, self.omega);
        let up = if self.b_up.iter().all(|z| z.norm() == 0.0) {
            DVector::zeros(n)
        } else {
            shifted
                .lu()
                .solve(&(-&self.b_up))
                .ok_or_else(|| Error::Singular("shifted drift matrix".into()))?
        };
        Ok(PeriodicAffineState {
            dc,
            up,
            omega: self.omega,
        })
    }

    /// Closed-form solution `y(t) = y_p(t) + e^{Mt}(y0 − y_p(0))` with `y_p`
    /// the periodic particular solution.
    pub fn solution(&self, y0: &DVector<f64>, times: &[f64]) -> Result<Vec<DVector<f64>>> {
        if y0.len() != self.dim() {
            return Err(Error::Dimension("initial state length mismatch".into()));
        }
        let p = self.particular_solution()?;
        let offset = y0 - p.at(0.0);
        Ok(times
            .iter()
            .map(|&t| p.at(t) + expm_action(&self.matrix, t).0 * &offset)
            .collect())
    }
}

/// Periodic covariance `V(t) = V_dc + V_up e^{iωt} + c.c.`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSteadyState {
    pub dc: DMatrix<f64>,
    pub up: DMatrix<Complex64>,
    pub omega: f64,
}

impl PeriodicSteadyState {
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        self.at_phase(Complex64::from_polar(1.0, self.omega * t))
    }

    pub fn at_phase(&self, phase: Complex64) -> DMatrix<f64> {
        &self.dc + self.up.map(|z| 2.0 * (z * phase).re)
    }
}

/// Vectorized (column-major) form of `dV/dt = A V + V Aᵀ + D(t)`.
pub fn lyapunov_system(eqs: &MomentEquations) -> AffineSystem {
    let n = eqs.dim();
    let eye = DMatrix::<f64>::identity(n, n);
    let l = eye.kronecker(&eqs.drift) + eqs.drift.kronecker(&eye);
    AffineSystem {
        matrix: l,
        b_dc: DVector::from_column_slice(eqs.diffusion_dc.as_slice()),
        b_up: DVector::from_column_slice(eqs.diffusion_up.as_slice()),
        omega: eqs.frequency,
    }
}

/// Periodic steady covariance of a Hurwitz moment system, from two linear solves
/// on the Kronecker-vectorized Lyapunov operator.
pub fn periodic_steady_state(eqs: &MomentEquations) -> Result<PeriodicSteadyState> {
    check_hurwitz(&eqs.drift)?;
    let n = eqs.dim();
    let p = lyapunov_system(eqs).particular_solution()?;
    let dc = DMatrix::from_column_slice(n, n, p.dc.as_slice());
    let up = DMatrix::from_column_slice(n, n, p.up.as_slice());
    Ok(PeriodicSteadyState {
        dc: (&dc + dc.transpose()) * 0.5,
        up: (&up + up.transpose()) * Complex64::new(0.5, 0.0),
        omega: eqs.frequency,
    })
}
