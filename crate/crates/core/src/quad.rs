//! Adaptive Simpson quadrature.
//!
//! The crate computes entropy fluxes and relative entropies as integrals of
//! smooth (piecewise-smooth at worst) integrands over short intervals, so a
//! classic adaptive Simpson rule with Richardson correction is accurate and
//! cheap. Tolerances are absolute; the default `1e-10` is exposed through
//! the model type and can be overridden there.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Hard recursion cap; with interval halving this allows subintervals down
/// to 2^-48 of the original length, far below any tolerance in use.
const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` (orientation-sensitive: swapping the ends
/// flips the sign) to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::Parameter(format!(
            "quadrature tolerance must be positive, got {}",
            tol.as_f64()
        )));
    }
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let two = T::of(2.0);
    let m = (lo + hi) / two;
    let flo = f(lo);
    let fm = f(m);
    let fhi = f(hi);
    let whole = simpson(lo, hi, flo, fm, fhi);
    let v = recurse(f, lo, hi, flo, fm, fhi, whole, tol, MAX_DEPTH)?;
    Ok(sign * v)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Result<T> {
    let two = T::of(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // 15 = 2^4 - 1: Richardson factor for the composite rule.
    if delta.abs() <= T::of(15.0) * tol || (b - a).abs() < T::epsilon() * T::of(4.0) {
        return Ok(left + right + delta / T::of(15.0));
    }
    if depth == 0 {
        return Err(Error::Refinement(format!(
            "adaptive Simpson hit depth cap on [{}, {}]",
            a.as_f64(),
            b.as_f64()
        )));
    }
    let half_tol = tol / two;
    let l = recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        // Simpson is exact on cubics; the adaptive wrapper must not spoil it.
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        let v = adaptive_simpson(&f, -1.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(v, 9.0 - 3.0 + 3.0, max_relative = 1e-14);
    }

    #[test]
    fn respects_orientation() {
        let f = |x: f64| x.exp();
        let fwd = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        let bwd = adaptive_simpson(&f, 1.0, 0.0, 1e-12).unwrap();
        assert_relative_eq!(fwd, std::f64::consts::E - 1.0, epsilon = 1e-12);
        assert_relative_eq!(fwd, -bwd, epsilon = 1e-14);
    }

    #[test]
    fn meets_tolerance_on_oscillatory_integrand() {
        let f = |x: f64| (10.0 * x).sin();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        let v = adaptive_simpson(&f, 0.0, 1.0, 1e-11).unwrap();
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn handles_kinked_integrand() {
        // |x| has a kink at 0; adaptivity must localize it.
        let f = |x: f64| x.abs();
        let v = adaptive_simpson(&f, -1.0, 2.0, 1e-11).unwrap();
        assert_relative_eq!(v, 2.5, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(adaptive_simpson(&|x: f64| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_width_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|x: f64| x.exp(), 0.3, 0.3, 1e-10).unwrap(), 0.0);
    }
}
