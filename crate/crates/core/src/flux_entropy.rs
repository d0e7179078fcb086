//! Flux/entropy pairs for scalar conservation laws.
//!
//! A model bundles a strictly convex flux `A` and a strictly convex entropy
//! `eta` (both C^2 with explicit first and second derivatives) for the
//! conservation law
//!
//! ```text
//!     u_t + A(u)_x = 0.
//! ```
//!
//! The entropy flux `q` is the primitive of `eta' A'` vanishing at 0, so
//! `(eta, q)` is an entropy pair. The relative quantities
//!
//! ```text
//!     eta(a|b) = eta(a) - eta(b) - eta'(b)(a - b)
//!     q(a; b)  = q(a) - q(b) - eta'(b)(A(a) - A(b))
//! ```
//!
//! drive everything else in the crate: shock admissibility, the shift
//! velocity `V_eps`, and the relative-entropy certificates.
//!
//! All state arguments are validated against the working interval, a 5%
//! margin around `[-B, B]` where `B` is the declared state bound.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::scalar::Real;

/// Shared scalar function handle.
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Default absolute quadrature tolerance used by the integral functionals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Denominators of `V_eps` smaller than this are treated as zero.
pub const ZERO_DENOMINATOR_TOL: f64 = 1e-12;

/// Relative margin of the working interval beyond the state bound.
const WORKING_MARGIN: f64 = 0.05;

/// Grid resolution used to validate convexity at construction.
const VALIDATION_GRID: usize = 2048;

/// Grid resolution used by [`FluxEntropyModel::derive_constants`].
const CONSTANTS_GRID: usize = 10_000;

/// A smooth scalar function together with its first two derivatives.
#[derive(Clone)]
pub struct SmoothTriple<T: Real> {
    pub f: ScalarFn<T>,
    pub d1: ScalarFn<T>,
    pub d2: ScalarFn<T>,
}

impl<T: Real> SmoothTriple<T> {
    /// Wraps explicit closures for a function and its two derivatives.
    pub fn from_fns(
        f: impl Fn(T) -> T + Send + Sync + 'static,
        d1: impl Fn(T) -> T + Send + Sync + 'static,
        d2: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), d1: Arc::new(d1), d2: Arc::new(d2) }
    }

    /// Polynomial `c[0] + c[1] u + c[2] u^2 + ...` with analytic derivatives.
    pub fn polynomial(coeffs: &[T]) -> Self {
        fn horner<T: Real>(c: &[T], x: T) -> T {
            c.iter().rev().fold(T::zero(), |acc, &ci| acc * x + ci)
        }
        fn diff<T: Real>(c: &[T]) -> Vec<T> {
            c.iter()
                .enumerate()
                .skip(1)
                .map(|(i, &ci)| ci * T::of(i as f64))
                .collect()
        }
        let c0: Vec<T> = coeffs.to_vec();
        let c1 = diff(&c0);
        let c2 = diff(&c1);
        Self {
            f: Arc::new(move |x| horner(&c0, x)),
            d1: Arc::new(move |x| horner(&c1, x)),
            d2: Arc::new(move |x| horner(&c2, x)),
        }
    }

    /// The Burgers flux `A(u) = u^2 / 2`.
    pub fn burgers_flux() -> Self {
        Self::from_fns(
            |u: T| u * u / T::of(2.0),
            |u: T| u,
            |_| T::one(),
        )
    }

    /// The quartic flux `A(u) = u^4/4 + u^2/2` (strictly convex, `A'' >= 1`).
    pub fn quartic_flux() -> Self {
        Self::from_fns(
            |u: T| u * u * u * u / T::of(4.0) + u * u / T::of(2.0),
            |u: T| u * u * u + u,
            |u: T| T::of(3.0) * u * u + T::one(),
        )
    }

    /// The square entropy `eta(u) = u^2`.
    pub fn square_entropy() -> Self {
        Self::from_fns(
            |u: T| u * u,
            |u: T| T::of(2.0) * u,
            |_| T::of(2.0),
        )
    }

    /// The exponential entropy `eta(u) = cosh(u)` (`eta'' = cosh >= 1`).
    pub fn cosh_entropy() -> Self {
        Self::from_fns(|u: T| u.cosh(), |u: T| u.sinh(), |u: T| u.cosh())
    }
}

/// Constants derived from a model on `[-B, B]`.
///
/// They certify, for all `a, b` in `[-B, B]`:
///
/// ```text
///     c_star (a-b)^2 <= eta(a|b) <= c_dstar (a-b)^2
///     |q(a; b)| <= s * eta(a|b)
/// ```
///
/// together with `A'' >= inf_a2 > 0` and `|A'| <= sup_abs_a1`. The bounds
/// come from a dense grid, padded by a grid-Lipschitz estimate so that the
/// inequalities hold for the true suprema/infima, then widened by the
/// caller's safety factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T: Real> {
    /// Lower bound for `A''` on `[-B, B]` (divided by the safety factor).
    pub inf_a2: T,
    /// Upper bound for `|A'|` on `[-B, B]` (pad included, no safety factor).
    pub sup_abs_a1: T,
    /// Lower quadratic-comparison constant, `inf eta'' / 2 / safety`.
    pub c_star: T,
    /// Upper quadratic-comparison constant, `sup eta'' / 2 * safety`.
    pub c_dstar: T,
    /// Relative-flux domination constant, `safety * sup_abs_a1`.
    pub s: T,
}

/// A strictly convex flux paired with a strictly convex entropy.
#[derive(Clone)]
pub struct FluxEntropyModel<T: Real> {
    flux: SmoothTriple<T>,
    entropy: SmoothTriple<T>,
    state_bound: T,
    working: (T, T),
    quad_tol: T,
}

impl<T: Real> FluxEntropyModel<T> {
    /// Builds and validates a model with state bound `B > 0`.
    ///
    /// Strict convexity of both `A` and `eta` is checked on a dense grid
    /// over the working interval `[-1.05 B, 1.05 B]`.
    pub fn new(flux: SmoothTriple<T>, entropy: SmoothTriple<T>, state_bound: T) -> Result<Self> {
        if !(state_bound > T::zero()) || !state_bound.is_finite() {
            return Err(Error::Parameter(format!(
                "state bound must be positive and finite, got {}",
                state_bound.as_f64()
            )));
        }
        let margin = T::of(1.0 + WORKING_MARGIN);
        let lo = -state_bound * margin;
        let hi = state_bound * margin;
        let model = Self {
            flux,
            entropy,
            state_bound,
            working: (lo, hi),
            quad_tol: T::of(DEFAULT_QUAD_TOL),
        };
        model.validate_convexity()?;
        Ok(model)
    }

    /// Burgers flux with the square entropy.
    pub fn burgers(state_bound: T) -> Result<Self> {
        Self::new(SmoothTriple::burgers_flux(), SmoothTriple::square_entropy(), state_bound)
    }

    /// Quartic flux with the cosh entropy.
    pub fn quartic_cosh(state_bound: T) -> Result<Self> {
        Self::new(SmoothTriple::quartic_flux(), SmoothTriple::cosh_entropy(), state_bound)
    }

    fn validate_convexity(&self) -> Result<()> {
        let (lo, hi) = self.working;
        let n = VALIDATION_GRID;
        let step = (hi - lo) / T::of(n as f64);
        for i in 0..=n {
            let u = lo + step * T::of(i as f64);
            let a2 = (self.flux.d2)(u);
            let e2 = (self.entropy.d2)(u);
            if !(a2 > T::zero()) || !a2.is_finite() {
                return Err(Error::NonConvex(format!(
                    "A''({}) = {} is not strictly positive",
                    u.as_f64(),
                    a2.as_f64()
                )));
            }
            if !(e2 > T::zero()) || !e2.is_finite() {
                return Err(Error::NonConvex(format!(
                    "eta''({}) = {} is not strictly positive",
                    u.as_f64(),
                    e2.as_f64()
                )));
            }
        }
        Ok(())
    }

    /// Declared state bound `B`.
    pub fn state_bound(&self) -> T {
        self.state_bound
    }

    /// Working interval, `[-1.05 B, 1.05 B]`.
    pub fn working_interval(&self) -> (T, T) {
        self.working
    }

    /// Absolute tolerance used for the integral functionals.
    pub fn quad_tol(&self) -> T {
        self.quad_tol
    }

    /// Overrides the quadrature tolerance (must be positive).
    pub fn set_quad_tol(&mut self, tol: T) -> Result<()> {
        if !(tol > T::zero()) || !tol.is_finite() {
            return Err(Error::Parameter(format!(
                "quadrature tolerance must be positive, got {}",
                tol.as_f64()
            )));
        }
        self.quad_tol = tol;
        Ok(())
    }

    /// Checks that `u` lies in the working interval.
    pub fn check_state(&self, u: T) -> Result<()> {
        let (lo, hi) = self.working;
        if u >= lo && u <= hi {
            Ok(())
        } else {
            Err(Error::OutOfDomain { value: u.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() })
        }
    }

    pub fn flux(&self, u: T) -> T {
        (self.flux.f)(u)
    }

    pub fn dflux(&self, u: T) -> T {
        (self.flux.d1)(u)
    }

    pub fn ddflux(&self, u: T) -> T {
        (self.flux.d2)(u)
    }

    pub fn entropy(&self, u: T) -> T {
        (self.entropy.f)(u)
    }

    pub fn dentropy(&self, u: T) -> T {
        (self.entropy.d1)(u)
    }

    pub fn ddentropy(&self, u: T) -> T {
        (self.entropy.d2)(u)
    }

    /// Entropy flux `q(u) = \int_0^u eta'(v) A'(v) dv`, normalized `q(0) = 0`.
    pub fn entropy_flux(&self, u: T) -> Result<T> {
        self.check_state(u)?;
        adaptive_simpson(&|v| self.dentropy(v) * self.dflux(v), T::zero(), u, self.quad_tol)
    }

    /// Relative entropy `eta(a|b) = eta(a) - eta(b) - eta'(b)(a-b)`.
    ///
    /// Nonnegative, zero exactly on the diagonal, quadratic in `a - b`.
    pub fn relative_entropy(&self, a: T, b: T) -> Result<T> {
        self.check_state(a)?;
        self.check_state(b)?;
        Ok(self.entropy(a) - self.entropy(b) - self.dentropy(b) * (a - b))
    }

    /// Relative entropy flux `q(a; b) = q(a) - q(b) - eta'(b)(A(a) - A(b))`.
    ///
    /// Evaluated as the single integral `\int_b^a (eta'(v) - eta'(b)) A'(v) dv`,
    /// which is algebraically identical and avoids cancellation between two
    /// large primitives.
    pub fn relative_flux(&self, a: T, b: T) -> Result<T> {
        self.check_state(a)?;
        self.check_state(b)?;
        let e1b = self.dentropy(b);
        adaptive_simpson(&|v| (self.dentropy(v) - e1b) * self.dflux(v), b, a, self.quad_tol)
    }

    /// Rankine-Hugoniot speed `sigma = (A(uR) - A(uL)) / (uR - uL)`.
    pub fn rh_speed(&self, ul: T, ur: T) -> Result<T> {
        self.check_state(ul)?;
        self.check_state(ur)?;
        if ul == ur {
            return Err(Error::DegenerateShock(ul.as_f64()));
        }
        Ok((self.flux(ur) - self.flux(ul)) / (ur - ul))
    }

    /// Shock entropy dissipation
    /// `Lambda = q(uR) - q(uL) - sigma (eta(uR) - eta(uL))`.
    ///
    /// Strictly negative exactly for entropic jumps (`uL > uR`), strictly
    /// positive for the reversed ordering.
    pub fn shock_dissipation(&self, ul: T, ur: T) -> Result<T> {
        let sigma = self.rh_speed(ul, ur)?;
        let dq = adaptive_simpson(&|v| self.dentropy(v) * self.dflux(v), ul, ur, self.quad_tol)?;
        Ok(dq - sigma * (self.entropy(ur) - self.entropy(ul)))
    }

    /// Shift velocity
    ///
    /// ```text
    ///     V_eps(u, uL, uR) = [q(u;uR) - q(u;uL) - eps]_+
    ///                        / (eta(u|uR) - eta(u|uL)),
    /// ```
    ///
    /// defined as 0 when the denominator is smaller than
    /// [`ZERO_DENOMINATOR_TOL`] in absolute value. Requires `uL >= uR` and
    /// `eps >= 0`. Satisfies `|V_eps| <= |A'(u)|`.
    pub fn v_epsilon(&self, u: T, ul: T, ur: T, eps: T) -> Result<T> {
        self.check_state(u)?;
        if ul < ur {
            return Err(Error::Ordering(format!(
                "v_epsilon requires uL >= uR, got uL = {}, uR = {}",
                ul.as_f64(),
                ur.as_f64()
            )));
        }
        if !(eps >= T::zero()) {
            return Err(Error::Parameter(format!("eps must be nonnegative, got {}", eps.as_f64())));
        }
        let den = self.relative_entropy(u, ur)? - self.relative_entropy(u, ul)?;
        if den.abs() < T::of(ZERO_DENOMINATOR_TOL) {
            return Ok(T::zero());
        }
        let num = self.relative_flux(u, ur)? - self.relative_flux(u, ul)? - eps;
        if num <= T::zero() {
            return Ok(T::zero());
        }
        Ok(num / den)
    }

    /// Derives certified comparison constants on `[-B, B]`.
    ///
    /// `safety >= 1` widens every bound in its conservative direction. Grid
    /// extrema are padded by `L h / 2` (grid-estimated Lipschitz constant
    /// times half the grid step) so they dominate the true extrema of the
    /// sampled derivatives.
    pub fn derive_constants(&self, safety: T) -> Result<DerivedConstants<T>> {
        if !(safety >= T::one()) {
            return Err(Error::Parameter(format!(
                "safety factor must be >= 1, got {}",
                safety.as_f64()
            )));
        }
        let b = self.state_bound;
        let n = CONSTANTS_GRID;
        let step = (b + b) / T::of(n as f64);
        let mut a2 = Vec::with_capacity(n + 1);
        let mut abs_a1 = Vec::with_capacity(n + 1);
        let mut e2 = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let u = -b + step * T::of(i as f64);
            a2.push(self.ddflux(u));
            abs_a1.push(self.dflux(u).abs());
            e2.push(self.ddentropy(u));
        }
        let pad = |vals: &[T]| -> T {
            let mut lip = T::zero();
            for w in vals.windows(2) {
                lip = lip.max((w[1] - w[0]).abs());
            }
            // lip is already L*h over one cell; half of it pads the extrema.
            lip / T::of(2.0)
        };
        let min = |vals: &[T]| vals.iter().copied().fold(T::infinity(), T::min);
        let max = |vals: &[T]| vals.iter().copied().fold(-T::infinity(), T::max);

        let inf_a2_raw = min(&a2) - pad(&a2);
        let inf_e2_raw = min(&e2) - pad(&e2);
        if !(inf_a2_raw > T::zero()) || !(inf_e2_raw > T::zero()) {
            return Err(Error::NonConvex(format!(
                "padded grid infima not positive: inf A'' ~ {}, inf eta'' ~ {}",
                inf_a2_raw.as_f64(),
                inf_e2_raw.as_f64()
            )));
        }
        let sup_abs_a1 = max(&abs_a1) + pad(&abs_a1);
        let two = T::of(2.0);
        Ok(DerivedConstants {
            inf_a2: inf_a2_raw / safety,
            sup_abs_a1,
            c_star: inf_e2_raw / two / safety,
            c_dstar: (max(&e2) + pad(&e2)) / two * safety,
            s: safety * sup_abs_a1,
        })
    }
}
