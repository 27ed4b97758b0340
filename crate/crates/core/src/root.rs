//! Safeguarded secant iteration on a sign-changing bracket.

#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Finds a root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` have opposite
/// signs. Each iteration takes a secant step through the bracket endpoints
/// and falls back to bisection whenever the step leaves the bracket or the
/// bracket fails to halve. Stops once `|f| <= tol` or the bracket collapses
/// to adjacent floats.
pub fn bracketed_root<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> RootResult
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    debug_assert!(f_lo.signum() != f_hi.signum() || f_lo == 0.0 || f_hi == 0.0);
    if f_lo.abs() <= tol {
        return RootResult { root: lo, value: f_lo, iterations: 0 };
    }
    if f_hi.abs() <= tol {
        return RootResult { root: hi, value: f_hi, iterations: 0 };
    }

    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut width = hi - lo;
    for it in 1..=max_iter {
        let secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        let mid = 0.5 * (lo + hi);
        let x = if secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            mid
        };
        // Bisect if the previous step did not at least halve the bracket.
        let x = if hi - lo > 0.5 * width { mid } else { x };
        width = hi - lo;

        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() <= tol || x <= lo || x >= hi {
            return RootResult { root: best.0, value: best.1, iterations: it };
        }
        if fx.signum() == f_lo.signum() {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
    }
    RootResult { root: best.0, value: best.1, iterations: max_iter }
}
