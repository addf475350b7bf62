//! Small numerical kernels: a scalar RK4 step, bracketed bisection, adaptive
//! Simpson quadrature and cubic Hermite interpolation.

use crate::error::{Error, Result};

/// One classical 4th-order Runge-Kutta step of `dy/dx = f(y, x)` from `(x, y)`
/// with signed step `h`.
#[inline]
pub fn rk4_step<F>(f: F, x: f64, y: f64, h: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let half = 0.5 * h;
    let k1 = f(y, x);
    let k2 = f(y + half * k1, x + half);
    let k3 = f(y + half * k2, x + half);
    let k4 = f(y + h * k3, x + h);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Bisection on `[lo, hi]` for a sign change of `g`. Stops once the bracket is
/// narrower than `x_tol` or `|g| <= f_tol`, returning the endpoint with the
/// smaller residual.
pub fn bisect<G>(g: G, mut lo: f64, mut hi: f64, x_tol: f64, f_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut best = if g_lo.abs() < g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid.abs() < best.1.abs() {
            best = (mid, g_mid);
        }
        if g_mid == 0.0 || g_mid.abs() <= f_tol || (hi - lo).abs() <= x_tol {
            break;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.0)
}

const SIMPSON_MAX_DEPTH: u32 = 40;

#[inline]
fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= SIMPSON_MAX_DEPTH || !delta.is_finite() {
        return Err(Error::QuadratureDiverged {
            a,
            b,
            depth: SIMPSON_MAX_DEPTH,
        });
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth + 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth + 1)?)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`
/// (recursion depth capped at 40). Reversed limits give the negated integral.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Cubic Hermite interpolation on `[x0, x1]` from values and slopes at both ends.
#[inline]
pub fn hermite(x0: f64, y0: f64, m0: f64, x1: f64, y1: f64, m1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
}
