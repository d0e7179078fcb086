//! Classical solutions for nondecreasing Lipschitz data.
//!
//! For a strictly convex flux and nondecreasing Lipschitz initial datum
//! `v0`, the characteristics `x = y + t A'(v0(y))` never cross, and the
//! unique classical solution of `v_t + A(v)_x = 0` is recovered by
//! inverting the characteristic map: `v(x, t) = v0(y)` where
//! `F(y) = y + t A'(v0(y))` solves `F(y) = x`. Since `F` is strictly
//! increasing with slope at least 1, bisection on a speed-bound bracket is
//! robust and quadrature-free.
//!
//! Solutions inherit every structural property of the datum: they are
//! nondecreasing in `x` for each `t`, preserve the sup norm, satisfy the
//! comparison principle, and obey the one-sided Oleinik bound
//! `v(x+z, t) - v(x, t) <= z / (t inf A'')` for `z, t > 0`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux_entropy::FluxEntropyModel;
use crate::piecewise::{MonotoneLipschitzFn, SampleGrid};
use crate::scalar::Real;

/// Default absolute tolerance for the characteristic inversion.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Classical solution transported along characteristics.
#[derive(Clone)]
pub struct ClassicalSolution<T: Real> {
    model: Arc<FluxEntropyModel<T>>,
    datum: MonotoneLipschitzFn<T>,
    /// Exact bound for |A'| over the datum's value range (A' is increasing,
    /// so the extrema sit at the range endpoints).
    speed_bound: T,
    root_tol: T,
}

impl<T: Real> ClassicalSolution<T> {
    /// Wraps a datum; all datum values must lie in the model's working
    /// interval.
    pub fn new(model: Arc<FluxEntropyModel<T>>, datum: MonotoneLipschitzFn<T>) -> Result<Self> {
        model.check_state(datum.min_value())?;
        model.check_state(datum.max_value())?;
        let speed_bound = model
            .dflux(datum.min_value())
            .abs()
            .max(model.dflux(datum.max_value()).abs());
        Ok(Self { model, datum, speed_bound, root_tol: T::of(DEFAULT_ROOT_TOL) })
    }

    /// Constant-in-space solution.
    pub fn constant(model: Arc<FluxEntropyModel<T>>, c: T) -> Result<Self> {
        Self::new(model, MonotoneLipschitzFn::constant(c))
    }

    pub fn datum(&self) -> &MonotoneLipschitzFn<T> {
        &self.datum
    }

    pub fn model(&self) -> &Arc<FluxEntropyModel<T>> {
        &self.model
    }

    /// Bound for the characteristic speeds of this solution.
    pub fn speed_bound(&self) -> T {
        self.speed_bound
    }

    /// Overrides the inversion tolerance (must be positive).
    pub fn set_root_tol(&mut self, tol: T) -> Result<()> {
        if !(tol > T::zero()) || !tol.is_finite() {
            return Err(Error::Parameter(format!("root tolerance must be positive, got {}", tol.as_f64())));
        }
        self.root_tol = tol;
        Ok(())
    }

    /// Evaluates `v(x, t)` for `t >= 0`.
    pub fn evaluate(&self, x: T, t: T) -> Result<T> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::Parameter(format!("time must be nonnegative, got {}", t.as_f64())));
        }
        if !x.is_finite() {
            return Err(Error::Parameter(format!("position must be finite, got {}", x.as_f64())));
        }
        if t == T::zero() {
            return Ok(self.datum.eval(x));
        }
        let reach = t * self.speed_bound + self.root_tol;
        let mut lo = x - reach;
        let mut hi = x + reach;
        let f = |y: T| y + t * self.model.dflux(self.datum.eval(y)) - x;
        let (flo, fhi) = (f(lo), f(hi));
        if flo > T::zero() || fhi < T::zero() {
            return Err(Error::Bracket(format!(
                "characteristic bracket [{}, {}] does not straddle x = {} at t = {}",
                lo.as_f64(),
                hi.as_f64(),
                x.as_f64(),
                t.as_f64()
            )));
        }
        // F has slope >= 1, so the x-uncertainty is at most the bracket width.
        while hi - lo > self.root_tol {
            let mid = (lo + hi) / T::of(2.0);
            if mid <= lo || mid >= hi {
                break; // bracket has collapsed to adjacent floats
            }
            if f(mid) <= T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.datum.eval((lo + hi) / T::of(2.0)))
    }

    /// One-sided difference-quotient modulus
    /// `max (v(x_j, t) - v(x_i, t)) t / (x_j - x_i)` over grid pairs
    /// `x_i < x_j`. For classical solutions of convex-flux equations this
    /// never exceeds `1 / inf A''`.
    pub fn oleinik_modulus(&self, t: T, grid: &SampleGrid<T>) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::Parameter(format!("modulus needs t > 0, got {}", t.as_f64())));
        }
        let pts: Vec<T> = grid.points().collect();
        let vals: Vec<T> = pts.iter().map(|&x| self.evaluate(x, t)).collect::<Result<_>>()?;
        let mut modulus = T::zero();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let quot = (vals[j] - vals[i]) * t / (pts[j] - pts[i]);
                modulus = modulus.max(quot);
            }
        }
        Ok(modulus)
    }

    /// Comparison principle check at time `t`: requires `self >= other` at
    /// `t = 0` (verified on the union of breakpoints) and returns whether
    /// the order persists on the grid within `num_tol`.
    pub fn comparison_check(
        &self,
        other: &ClassicalSolution<T>,
        grid: &SampleGrid<T>,
        t: T,
        num_tol: T,
    ) -> Result<bool> {
        let mut probes: Vec<T> = self
            .datum
            .xs()
            .iter()
            .chain(other.datum.xs().iter())
            .copied()
            .collect();
        probes.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        for &x in &probes {
            if self.datum.eval(x) < other.datum.eval(x) {
                return Err(Error::Ordering(format!(
                    "datum order violated at x = {}: {} < {}",
                    x.as_f64(),
                    self.datum.eval(x).as_f64(),
                    other.datum.eval(x).as_f64()
                )));
            }
        }
        for x in grid.points() {
            if self.evaluate(x, t)? < other.evaluate(x, t)? - num_tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn burgers() -> Arc<FluxEntropyModel<f64>> {
        Arc::new(FluxEntropyModel::burgers(2.0).unwrap())
    }

    fn clamp_datum() -> MonotoneLipschitzFn<f64> {
        MonotoneLipschitzFn::new(vec![(-1.0, -1.0), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn burgers_ramp_solution_is_exact() {
        // Datum clamp(x, -1, 1) under Burgers: v(x, t) = clamp(x/(1+t), -1, 1).
        let sol = ClassicalSolution::new(burgers(), clamp_datum()).unwrap();
        let cases: [(f64, f64); 5] = [(1.0, 1.0), (0.3, 0.5), (-0.8, 2.0), (5.0, 1.0), (-5.0, 3.0)];
        for &(x, t) in &cases {
            let want = (x / (1.0 + t)).clamp(-1.0, 1.0);
            assert_relative_eq!(sol.evaluate(x, t).unwrap(), want, epsilon = 1e-10);
        }
        assert_relative_eq!(sol.evaluate(1.0, 1.0).unwrap(), 0.5, epsilon = 1e-10);
    }

    #[test]
    fn time_zero_returns_datum() {
        let sol = ClassicalSolution::new(burgers(), clamp_datum()).unwrap();
        assert_relative_eq!(sol.evaluate(0.25, 0.0).unwrap(), 0.25);
    }

    #[test]
    fn constants_are_transported() {
        let sol = ClassicalSolution::constant(burgers(), 0.7).unwrap();
        for &(x, t) in &[(0.0, 0.0), (1.0, 2.0), (-4.0, 0.3)] {
            assert_relative_eq!(sol.evaluate(x, t).unwrap(), 0.7);
        }
    }

    #[test]
    fn quartic_characteristics_invert() {
        // v(y + t A'(v0(y)), t) = v0(y) must hold exactly along characteristics.
        let model = Arc::new(FluxEntropyModel::quartic_cosh(2.0).unwrap());
        let datum = MonotoneLipschitzFn::new(vec![(-1.0, -0.5), (1.0, 0.5)]).unwrap();
        let sol = ClassicalSolution::new(model.clone(), datum.clone()).unwrap();
        let t = 0.8;
        for &y in &[-0.9, -0.2, 0.0, 0.4, 0.95] {
            let v0 = datum.eval(y);
            let x = y + t * model.dflux(v0);
            assert_relative_eq!(sol.evaluate(x, t).unwrap(), v0, epsilon = 1e-9);
        }
    }

    #[test]
    fn sup_norm_is_preserved() {
        let sol = ClassicalSolution::new(burgers(), clamp_datum()).unwrap();
        for i in 0..60 {
            let x = -3.0 + 0.1 * i as f64;
            let v = sol.evaluate(x, 1.7).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn oleinik_modulus_of_ramp() {
        // Exact solution slope is 1/(1+t); modulus = t/(1+t) = 1/2 at t = 1.
        let sol = ClassicalSolution::new(burgers(), clamp_datum()).unwrap();
        let grid = SampleGrid::new(-3.0, 3.0, 240).unwrap();
        let m = sol.oleinik_modulus(1.0, &grid).unwrap();
        assert_relative_eq!(m, 0.5, epsilon = 1e-6);
        assert!(sol.oleinik_modulus(0.0, &grid).is_err());
    }

    #[test]
    fn comparison_principle_holds_for_ordered_data() {
        let model = burgers();
        let low = ClassicalSolution::new(model.clone(), clamp_datum()).unwrap();
        let high =
            ClassicalSolution::new(model.clone(), clamp_datum().offset(0.5)).unwrap();
        let grid = SampleGrid::new(-4.0, 4.0, 160).unwrap();
        assert!(high.comparison_check(&low, &grid, 1.3, 1e-10).unwrap());
        // Crossed data must be rejected, not silently compared.
        assert!(matches!(
            low.comparison_check(&high, &grid, 1.3, 1e-10),
            Err(Error::Ordering(_))
        ));
    }

    #[test]
    fn rejects_negative_time_and_out_of_domain_datum() {
        let sol = ClassicalSolution::new(burgers(), clamp_datum()).unwrap();
        assert!(sol.evaluate(0.0, -1.0).is_err());
        let wild = MonotoneLipschitzFn::new(vec![(0.0, -5.0), (1.0, 5.0)]).unwrap();
        assert!(ClassicalSolution::new(burgers(), wild).is_err());
    }
}
