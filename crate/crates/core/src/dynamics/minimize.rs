const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    /// The minimum sits on the bracket edge: no interior decrease was found.
    pub at_boundary: bool,
}

/// Golden-section search for a minimizer of `f` on `[a, b]` to within `tol`.
pub fn minimize_scalar<F>(mut f: F, a: f64, b: f64, tol: f64) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (lo0, hi0) = (a.min(b), a.max(b));
    let (mut lo, mut hi) = (lo0, hi0);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let (mut x, mut fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let mut at_boundary = false;
    for edge in [lo0, hi0] {
        if (x - edge).abs() <= 2.0 * tol {
            let fe = f(edge);
            if fe <= fx {
                x = edge;
                fx = fe;
                at_boundary = true;
            }
        }
    }
    Minimum { x, fx, at_boundary }
}
