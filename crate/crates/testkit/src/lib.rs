//! Independent reference computations for the entroshift test suites.
//!
//! Everything here is deliberately implemented on a different numerical
//! route than the library under test: Gauss-Legendre quadrature instead of
//! adaptive Simpson, the symmetric double-integral form of the shock
//! dissipation instead of entropy-flux differences, and a stand-alone
//! interval-splitting integrator. Agreement between the two routes is the
//! evidence the tests rely on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG for sampled test sweeps.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
/// iteration from the Chebyshev-based initial guess; weights are
/// `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2, "need at least two nodes");
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((-x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Evaluates `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss-Legendre integration of `f` over `[a, b]`.
pub fn gl_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    let rule = gauss_legendre(nodes);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for &(x, w) in &rule {
            total += w * f(mid + half * x);
        }
    }
    total * (b - a) / (2.0 * panels as f64)
}

/// Tensor-product Gauss-Legendre integration over a rectangle.
pub fn gl_integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    panels: usize,
    nodes: usize,
) -> f64 {
    let rule = gauss_legendre(nodes);
    let hx = (x_range.1 - x_range.0) / panels as f64;
    let hy = (y_range.1 - y_range.0) / panels as f64;
    let mut total = 0.0;
    for px in 0..panels {
        let cx = x_range.0 + (px as f64 + 0.5) * hx;
        for py in 0..panels {
            let cy = y_range.0 + (py as f64 + 0.5) * hy;
            for &(x, w1) in &rule {
                let xv = cx + 0.5 * hx * x;
                for &(y, w2) in &rule {
                    total += w1 * w2 * f(xv, cy + 0.5 * hy * y);
                }
            }
        }
    }
    total * hx * hy / 4.0
}

/// Shock entropy dissipation via the symmetric double integral
///
/// ```text
///     Lambda(uL, uR) = 1 / (2 (uR - uL))
///         * \int\int_{I^2} (eta'(u) - eta'(v)) (A'(u) - A'(v)) dv du,
/// ```
///
/// where `I` is the interval between `uL` and `uR`. This is an independent
/// route to `q(uR) - q(uL) - sigma (eta(uR) - eta(uL))`.
pub fn shock_dissipation_oracle(
    dentropy: impl Fn(f64) -> f64 + Copy,
    dflux: impl Fn(f64) -> f64 + Copy,
    ul: f64,
    ur: f64,
) -> f64 {
    assert!(ul != ur, "degenerate jump");
    let (lo, hi) = if ul < ur { (ul, ur) } else { (ur, ul) };
    let double = gl_integrate_2d(
        |u, v| (dentropy(u) - dentropy(v)) * (dflux(u) - dflux(v)),
        (lo, hi),
        (lo, hi),
        4,
        24,
    );
    double / (2.0 * (ur - ul))
}

/// Stand-alone interval-splitting integrator (trapezoid + Richardson via
/// midpoint refinement). Used where the suites need an integral of a
/// possibly kinked integrand without touching the library's quadrature.
pub fn split_integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let coarse = 0.5 * (b - a) * (fa + fb);
        let fine = 0.25 * (b - a) * (fa + 2.0 * fm + fb);
        if depth == 0 || (fine - coarse).abs() <= 3.0 * tol {
            return fine + (fine - coarse) / 3.0;
        }
        go(f, a, m, fa, fm, tol * 0.5, depth - 1) + go(f, m, b, fm, fb, tol * 0.5, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    sign * go(f, lo, hi, f(lo), f(hi), tol, 52)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_high_degree_polynomials() {
        // n-point GL is exact through degree 2n-1.
        let v = gl_integrate(|x| x.powi(9) + x.powi(4), 0.0, 1.0, 1, 8);
        assert!((v - (0.1 + 0.2)).abs() < 1e-14);
    }

    #[test]
    fn gl_handles_transcendental_integrands() {
        let v = gl_integrate(|x| x.cos(), 0.0, 1.0, 2, 16);
        assert!((v - 1.0f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn gl_2d_separates_products() {
        let v = gl_integrate_2d(|x, y| x * x * y, (0.0, 1.0), (0.0, 2.0), 2, 8);
        assert!((v - (1.0 / 3.0) * 2.0).abs() < 1e-13);
    }

    #[test]
    fn dissipation_oracle_matches_burgers_closed_form() {
        // A = u^2/2, eta = u^2: Lambda(1, -1) = -4/3.
        let lam = shock_dissipation_oracle(|u| 2.0 * u, |u| u, 1.0, -1.0);
        assert!((lam + 4.0 / 3.0).abs() < 1e-12, "got {lam}");
        // General pair: Lambda(a, b) = (b - a)^3 / 6.
        let lam = shock_dissipation_oracle(|u| 2.0 * u, |u| u, 0.3, 1.7);
        assert!((lam - (1.7f64 - 0.3).powi(3) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn split_integrate_handles_kinks() {
        let v = split_integrate(&|x: f64| x.abs(), -1.0, 2.0, 1e-12);
        assert!((v - 2.5).abs() < 1e-10);
        let v = split_integrate(&|x: f64| x.exp(), 1.0, 0.0, 1e-12);
        assert!((v + (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn rng_is_deterministic() {
        use rand::RngCore;
        let mut a = rng(7);
        let mut b = rng(7);
        assert_eq!(a.next_u64(), b.next_u64());
    }
}
