//! Bracketed bisection.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]` by bisection.
///
/// Stops when the bracket is narrower than `x_tol` or `|f(mid)| <= f_tol`.
/// A zero at either endpoint is returned directly.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64) -> Result<f64> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoSolution(format!(
            "no sign change on [{a}, {b}]: f(lo)={fa:e}, f(hi)={fb:e}"
        )));
    }
    // 200 halvings exhaust the f64 mantissa for any bracket.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if b - a <= x_tol && fm.abs() <= f_tol {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
