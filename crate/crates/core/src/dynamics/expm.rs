use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvector matrices worse conditioned than this use scaling and squaring.
pub const EIGVEC_COND_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpmMethod {
    Eigen,
    ScalingSquaring,
}

/// `e^{A t}` together with the method that produced it.
///
/// The eigendecomposition path is used when the eigenvector matrix is
/// well conditioned; otherwise a Padé scaling-and-squaring evaluation.
pub fn expm_action(a: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, ExpmMethod) {
    if let Some(e) = expm_eigen(a, t) {
        return (e, ExpmMethod::Eigen);
    }
    ((a * t).exp(), ExpmMethod::ScalingSquaring)
}

fn expm_eigen(a: &DMatrix<f64>, t: f64) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    if n == 0 || !a.is_square() {
        return None;
    }
    let ac = a.map(|x| Complex64::new(x, 0.0));
    let lambdas = a.complex_eigenvalues();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for (k, &lambda) in lambdas.iter().enumerate() {
        let shifted = &ac - DMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))?;
        let v: DVector<Complex64> = v_t.row(imin).adjoint();
        y.set_column(k, &v);
    }
    let sv = y.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin > EIGVEC_COND_LIMIT {
        return None;
    }
    let y_inv = y.clone().try_inverse()?;
    let d = DMatrix::from_diagonal(&lambdas.map(|l| (l * t).exp()));
    let e = &y * d * y_inv;
    e.iter().all(|z| z.is_finite()).then(|| e.map(|z| z.re))
}
