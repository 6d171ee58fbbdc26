//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Root of a continuous `f` on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Regula falsi with the Illinois modification, falling back to bisection
/// whenever the interpolated point fails to shrink the bracket by half.
/// Stops when `|f| <= ftol` or the bracket is narrower than `xtol`.
pub fn bisect_secant(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoSignChange { lo, hi });
    }
    // Which side was retained on the previous step, for the Illinois halving.
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = hi - lo;
        let mut x = hi - fhi * width / (fhi - flo);
        if !(x > lo && x < hi) || !x.is_finite() {
            x = lo + 0.5 * width;
        }
        let fx = f(x);
        let floor = 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
        if fx.abs() <= ftol || width <= xtol.max(floor) {
            return Ok(x);
        }
        let old_width = width;
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * old_width {
            let mid = lo + 0.5 * (hi - lo);
            let fm = f(mid);
            if fm.abs() <= ftol {
                return Ok(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            side = 0;
        }
    }
    Err(Error::NoConvergence(max_iter))
}
