//! Piecewise-linear nondecreasing Lipschitz functions.
//!
//! Initial data for the classical (characteristics) solver are represented
//! as piecewise-linear interpolants of sorted breakpoints, extended as
//! constants outside the breakpoint window. The representation is closed
//! under every construction in this crate: mollified step functions,
//! pointwise min/max against constants, and running sup/inf extensions all
//! stay piecewise linear.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nondecreasing piecewise-linear function with constant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneLipschitzFn<T: Real> {
    xs: Vec<T>,
    vs: Vec<T>,
    lip: T,
}

impl<T: Real> MonotoneLipschitzFn<T> {
    /// Builds from breakpoints `(x, v)`. Requires strictly increasing `x`,
    /// nondecreasing `v`, and at least one point.
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("need at least one breakpoint".into()));
        }
        let mut xs = Vec::with_capacity(points.len());
        let mut vs = Vec::with_capacity(points.len());
        for (x, v) in points {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::Parameter(format!(
                    "non-finite breakpoint ({}, {})",
                    x.as_f64(),
                    v.as_f64()
                )));
            }
            if let Some(&px) = xs.last() {
                if !(x > px) {
                    return Err(Error::Ordering(format!(
                        "breakpoint abscissae must increase strictly: {} after {}",
                        x.as_f64(),
                        px.as_f64()
                    )));
                }
            }
            if let Some(&pv) = vs.last() {
                if v < pv {
                    return Err(Error::Ordering(format!(
                        "breakpoint values must be nondecreasing: {} after {}",
                        v.as_f64(),
                        pv.as_f64()
                    )));
                }
            }
            xs.push(x);
            vs.push(v);
        }
        let mut lip = T::zero();
        for i in 1..xs.len() {
            lip = lip.max((vs[i] - vs[i - 1]) / (xs[i] - xs[i - 1]));
        }
        Ok(Self { xs, vs, lip })
    }

    /// The constant function `v(x) = c`.
    pub fn constant(c: T) -> Self {
        Self { xs: vec![T::zero()], vs: vec![c], lip: T::zero() }
    }

    /// Samples `f` at `n + 1` uniform points of `[lo, hi]`.
    ///
    /// Fails if the samples decrease anywhere: the caller is responsible
    /// for passing a nondecreasing function.
    pub fn from_fn(f: impl Fn(T) -> T, lo: T, hi: T, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::Parameter("sampling window must have positive width".into()));
        }
        let step = (hi - lo) / T::of(n as f64);
        let pts = (0..=n)
            .map(|i| {
                let x = if i == n { hi } else { lo + step * T::of(i as f64) };
                (x, f(x))
            })
            .collect();
        Self::new(pts)
    }

    /// Evaluates at `x` (constant extension outside the breakpoints).
    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0];
        }
        if x >= self.xs[n - 1] {
            return self.vs[n - 1];
        }
        // Invariant: xs[lo] <= x < xs[hi].
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.vs[lo] + w * (self.vs[hi] - self.vs[lo])
    }

    /// Value of the constant extension on the far left.
    pub fn left_value(&self) -> T {
        self.vs[0]
    }

    /// Value of the constant extension on the far right.
    pub fn right_value(&self) -> T {
        *self.vs.last().unwrap()
    }

    /// Minimum value (attained on the left by monotonicity).
    pub fn min_value(&self) -> T {
        self.left_value()
    }

    /// Maximum value (attained on the right by monotonicity).
    pub fn max_value(&self) -> T {
        self.right_value()
    }

    /// Certified Lipschitz constant (max breakpoint slope).
    pub fn lipschitz(&self) -> T {
        self.lip
    }

    /// Breakpoint abscissae.
    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    /// Breakpoint values.
    pub fn vs(&self) -> &[T] {
        &self.vs
    }

    /// New function with all values shifted by `c`.
    pub fn offset(&self, c: T) -> Self {
        Self {
            xs: self.xs.clone(),
            vs: self.vs.iter().map(|&v| v + c).collect(),
            lip: self.lip,
        }
    }
}

/// Uniform sampling grid `lo = x_0 < ... < x_n = hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid<T: Real> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
}

impl<T: Real> SampleGrid<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(hi > lo) || n == 0 {
            return Err(Error::Parameter(format!(
                "grid needs hi > lo and n >= 1, got [{}, {}] with n = {}",
                lo.as_f64(),
                hi.as_f64(),
                n
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        let step = (self.hi - self.lo) / T::of(self.n as f64);
        (0..=self.n).map(move |i| {
            if i == self.n {
                self.hi
            } else {
                self.lo + step * T::of(i as f64)
            }
        })
    }
}
