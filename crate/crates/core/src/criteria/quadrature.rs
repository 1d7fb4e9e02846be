use crate::error::{Error, Result};
use crate::scalar::Real;

/// Recursion depth after which an interval is declared unresolvable.
const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with adaptive
/// Simpson and Richardson correction. `a > b` gives the negated integral.
pub fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let v =
        refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH).ok_or(Error::QuadratureFailure {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::QuadratureFailure {
            a: a.to_f64_lossy(),
            b: b.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        })
    }
}

#[inline]
fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Option<T> {
    let m = (a + b) * T::lit(0.5);
    let lm = (a + m) * T::lit(0.5);
    let rm = (m + b) * T::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol {
        return Some(left + right + delta / T::lit(15.0));
    }
    // Interval narrower than the arithmetic can split: accept what we have if
    // it is already consistent to rounding, otherwise give up.
    if depth == 0 || m <= a.min(b) || m >= a.max(b) {
        return None;
    }
    let half = tol * T::lit(0.5);
    Some(
        refine(f, a, m, fa, flm, fm, left, half, depth - 1)?
            + refine(f, m, b, fm, frm, fb, right, half, depth - 1)?,
    )
}
