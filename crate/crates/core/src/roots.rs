//! Safeguarded Newton iteration on a sign-changing bracket.

use crate::error::{err, Result};
use crate::math::abs;

#[derive(Debug, Clone, Copy)]
pub struct RootTol {
    pub x_rel: f64,
    pub x_abs: f64,
    pub max_iter: usize,
}

impl Default for RootTol {
    fn default() -> Self {
        RootTol { x_rel: 1e-15, x_abs: 1e-300, max_iter: 200 }
    }
}

/// Root of `f` in `[lo, hi]` where `f` returns `(value, derivative)`.
/// Newton steps that leave the bracket or stall fall back to bisection.
pub fn newton<F: FnMut(f64) -> (f64, f64)>(mut f: F, lo: f64, hi: f64, tol: RootTol) -> Result<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(err!(NoRoot, "no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"));
    }
    let rising = fb > 0.0;
    let mut x = 0.5 * (a + b);
    let mut last_step = b - a;
    for _ in 0..tol.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            b = x;
        } else {
            a = x;
        }
        let mut next = if dfx != 0.0 && dfx.is_finite() { x - fx / dfx } else { f64::NAN };
        let step = abs(next - x);
        if !(next > a && next < b) || step > 0.5 * last_step {
            next = 0.5 * (a + b);
        }
        last_step = abs(next - x);
        let scale = tol.x_abs.max(tol.x_rel * abs(next));
        if last_step <= scale || b - a <= scale {
            return Ok(next);
        }
        x = next;
    }
    Err(err!(Convergence, "root finder exhausted iterations on [{lo}, {hi}]"))
}

/// Plain bisection for functions without a usable derivative.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: RootTol) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(err!(NoSignChange, "no sign change on [{lo}, {hi}]"));
    }
    for _ in 0..tol.max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if abs(b - a) <= tol.x_abs.max(tol.x_rel * abs(m)) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}
