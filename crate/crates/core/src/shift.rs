//! Filippov shift paths.
//!
//! A shift is a Lipschitz curve `h(t)` transporting the comparison point
//! between two ordered classical solutions across a weak solution `u`. It
//! solves, in the Filippov sense, the differential inclusion
//!
//! ```text
//!     hdot(t) = V_eps(u(h(t), t), ubar1(h(t), t), ubar2(h(t), t)),
//! ```
//!
//! where `V_eps` is the clamped shift velocity of the flux/entropy model.
//! At a discontinuity of `u` the admissible velocities form the interval
//! spanned by the two one-sided values; whenever the Rankine-Hugoniot
//! speed of the front lies in that interval the path rides the front
//! exactly, and otherwise it is released with the interval endpoint
//! nearest the front speed (ties broken toward the front speed).
//!
//! The event-driven integrator exploits that `u` is piecewise constant:
//! away from fronts the velocity field is smooth in `(x, t)` only through
//! the classical solutions, so explicit midpoint steps with
//! `dt = 1e-3 * horizon` are accurate to O(dt^2); steps are clipped at
//! front crossings and slab boundaries so capture decisions always happen
//! exactly on a front. A mollified integrator following the averaged
//! velocity `v_n(x,t) = int_0^1 V_eps(.(x + y/n, t)) dy` is provided as an
//! independent cross-check; it converges to the event-driven path as
//! `n -> inf`.

use crate::classical::ClassicalSolution;
use crate::error::{Error, Result};
use crate::flux_entropy::FluxEntropyModel;
use crate::front_tracking::FrontSolution;
use crate::scalar::Real;

/// Base step is this fraction of the integration horizon.
pub const SHIFT_DT_FACTOR: f64 = 1e-3;

/// Relative tolerance deciding that the path sits on a front.
pub const CAPTURE_POS_TOL: f64 = 1e-9;

/// Absolute slack when testing the front speed against the velocity
/// interval.
pub const CAPTURE_SPEED_TOL: f64 = 1e-10;

/// Hard cap on integration steps per path.
pub const MAX_SHIFT_STEPS: usize = 400_000;

/// Sampled Lipschitz path `t -> x` with per-segment velocities.
#[derive(Debug, Clone)]
pub struct ShiftPath<T: Real> {
    times: Vec<T>,
    positions: Vec<T>,
    /// Velocity on `[times[i], times[i+1]]`; length `times.len() - 1`.
    velocities: Vec<T>,
    lip_bound: T,
    eps: T,
}

impl<T: Real> ShiftPath<T> {
    fn from_parts(times: Vec<T>, positions: Vec<T>, velocities: Vec<T>, eps: T) -> Self {
        let lip_bound = velocities
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        Self { times, positions, velocities, lip_bound, eps }
    }

    /// Straight path from `(t0, x0)` with constant `velocity` up to `t1`.
    pub fn linear(t0: T, x0: T, velocity: T, t1: T) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::Parameter("linear path needs t1 > t0".into()));
        }
        Ok(Self::from_parts(
            vec![t0, t1],
            vec![x0, x0 + velocity * (t1 - t0)],
            vec![velocity],
            T::zero(),
        ))
    }

    pub fn t_start(&self) -> T {
        self.times[0]
    }

    pub fn t_end(&self) -> T {
        *self.times.last().expect("nonempty path")
    }

    pub fn start(&self) -> (T, T) {
        (self.times[0], self.positions[0])
    }

    /// Largest absolute segment velocity.
    pub fn lip_bound(&self) -> T {
        self.lip_bound
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn velocities(&self) -> &[T] {
        &self.velocities
    }

    /// Position by linear interpolation; `t` must lie within the span (a
    /// slack of 1e-12 of the span is clamped to the endpoints).
    pub fn eval(&self, t: T) -> Result<T> {
        let (a, b) = (self.t_start(), self.t_end());
        let slack = (b - a).max(T::one()) * T::of(1e-12);
        if t < a - slack || t > b + slack {
            return Err(Error::Horizon { t: t.as_f64(), horizon: b.as_f64() });
        }
        let t = t.max(a).min(b);
        // Last knot <= t.
        let mut lo = 0;
        let mut hi = self.times.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.times[mid] <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        if lo + 1 == self.times.len() {
            return Ok(self.positions[lo]);
        }
        let (t0, t1) = (self.times[lo], self.times[lo + 1]);
        let (x0, x1) = (self.positions[lo], self.positions[lo + 1]);
        if t1 == t0 {
            return Ok(x1);
        }
        Ok(x0 + (x1 - x0) * ((t - t0) / (t1 - t0)))
    }

    /// Segment velocity active at time `t` (right-continuous; the final
    /// segment extends to the endpoint).
    pub fn velocity_at(&self, t: T) -> Result<T> {
        if self.velocities.is_empty() {
            return Ok(T::zero());
        }
        let _ = self.eval(t)?;
        let mut lo = 0;
        let mut hi = self.times.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.times[mid] <= t {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(self.velocities[lo.min(self.velocities.len() - 1)])
    }

    /// Largest finite-difference slope between consecutive samples.
    pub fn max_difference_slope(&self) -> T {
        let mut worst = T::zero();
        for i in 1..self.times.len() {
            let dt = self.times[i] - self.times[i - 1];
            if dt > T::zero() {
                worst = worst.max(((self.positions[i] - self.positions[i - 1]) / dt).abs());
            }
        }
        worst
    }
}

/// Exact bound on characteristic speeds: `A'` is increasing, so its
/// absolute value over `[-B, B]` peaks at an endpoint.
pub fn speed_sup<T: Real>(model: &FluxEntropyModel<T>) -> T {
    let b = model.state_bound();
    model.dflux(-b).abs().max(model.dflux(b).abs())
}

fn check_datum_order<T: Real>(
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
) -> Result<()> {
    let mut xs: Vec<T> = ubar1
        .datum()
        .xs()
        .iter()
        .chain(ubar2.datum().xs().iter())
        .copied()
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    xs.dedup();
    if xs.is_empty() {
        xs.push(T::zero());
    }
    let tol = T::of(1e-12);
    for &x in &xs {
        let (a, b) = (ubar1.datum().eval(x), ubar2.datum().eval(x));
        if a < b - tol {
            return Err(Error::Ordering(format!(
                "ubar1 datum {} below ubar2 datum {} at x = {}",
                a.as_f64(),
                b.as_f64(),
                x.as_f64()
            )));
        }
    }
    Ok(())
}

/// Velocity of the inclusion at a non-front point.
fn field_velocity<T: Real>(
    model: &FluxEntropyModel<T>,
    u: &FrontSolution<T>,
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
    eps: T,
    x: T,
    t: T,
) -> Result<T> {
    let c = u.eval(x, t)?;
    let b1 = ubar1.evaluate(x, t)?;
    let b2 = ubar2.evaluate(x, t)?.min(b1);
    model.v_epsilon(c, b1, b2, eps)
}

/// Builds the shift path for `u` between ordered classical solutions on
/// `[t_star, t_end]`, starting from `x0`.
///
/// Preconditions: `ubar1`'s datum dominates `ubar2`'s pointwise,
/// `0 <= t_star <= t_end <= u.horizon()`, `eps >= 0`.
pub fn build_shift<T: Real>(
    u: &FrontSolution<T>,
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
    t_star: T,
    x0: T,
    eps: T,
    t_end: T,
) -> Result<ShiftPath<T>> {
    if !(eps >= T::zero()) {
        return Err(Error::Parameter(format!(
            "shift budget must be nonnegative, got {}",
            eps.as_f64()
        )));
    }
    if !(t_star >= T::zero()) || !(t_end >= t_star) {
        return Err(Error::Parameter("need 0 <= t_star <= t_end".into()));
    }
    if t_end > u.horizon() {
        return Err(Error::Horizon { t: t_end.as_f64(), horizon: u.horizon().as_f64() });
    }
    check_datum_order(ubar1, ubar2)?;
    let model = u.model().clone();
    let span = t_end - t_star;
    if !(span > T::zero()) {
        return Ok(ShiftPath::from_parts(vec![t_star], vec![x0], Vec::new(), eps));
    }
    let dt = span * T::of(SHIFT_DT_FACTOR);
    let two = T::of(2.0);

    let mut times = vec![t_star];
    let mut positions = vec![x0];
    let mut velocities: Vec<T> = Vec::new();

    let mut t = t_star;
    let mut h = x0;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > MAX_SHIFT_STEPS {
            return Err(Error::EventOverflow { max: MAX_SHIFT_STEPS });
        }
        let slab = u.slab_at(t)?;
        let slab_end = slab.t1.min(t_end);
        let mut dt_step = dt.min(slab_end - t);
        let ptol = T::of(CAPTURE_POS_TOL) * T::one().max(h.abs());
        let stol = T::of(CAPTURE_SPEED_TOL);

        // Fronts of the current slab with positions advanced to t.
        let fpos: Vec<T> = slab
            .fronts
            .iter()
            .map(|f| f.pos + f.speed * (t - slab.t0))
            .collect();

        // Capture test against every front we currently sit on.
        let mut captured: Option<usize> = None;
        let mut nearest: Option<usize> = None;
        for (i, &p) in fpos.iter().enumerate() {
            if (p - h).abs() > ptol {
                continue;
            }
            if nearest
                .map(|j| (p - h).abs() < (fpos[j] - h).abs())
                .unwrap_or(true)
            {
                nearest = Some(i);
            }
            let f = &slab.fronts[i];
            let v_minus = field_at_state(&model, ubar1, ubar2, eps, f.left, h, t)?;
            let v_plus = field_at_state(&model, ubar1, ubar2, eps, f.right, h, t)?;
            let (lo, hi) = (v_minus.min(v_plus), v_minus.max(v_plus));
            if f.speed >= lo - stol && f.speed <= hi + stol {
                captured = Some(i);
                break;
            }
        }

        let (h_new, v_used) = if let Some(i) = captured {
            // Ride the front exactly to the end of the step.
            let f = &slab.fronts[i];
            (f.pos + f.speed * (t + dt_step - slab.t0), f.speed)
        } else {
            let v = if let Some(i) = nearest {
                // Released: take the interval endpoint nearest the front
                // speed.
                let f = &slab.fronts[i];
                let v_minus = field_at_state(&model, ubar1, ubar2, eps, f.left, h, t)?;
                let v_plus = field_at_state(&model, ubar1, ubar2, eps, f.right, h, t)?;
                let (lo, hi) = (v_minus.min(v_plus), v_minus.max(v_plus));
                f.speed.max(lo).min(hi)
            } else {
                // Smooth point: explicit midpoint through the field.
                let k1 = field_velocity(&model, u, ubar1, ubar2, eps, h, t)?;
                let t_half = t + dt_step / two;
                field_velocity(&model, u, ubar1, ubar2, eps, h + k1 * (dt_step / two), t_half)?
            };
            // Clip the step at the first front crossing so that capture
            // decisions happen exactly on the front.
            let mut hit: Option<usize> = None;
            for (i, &p) in fpos.iter().enumerate() {
                if (p - h).abs() <= ptol {
                    continue;
                }
                let rel = v - slab.fronts[i].speed;
                if rel == T::zero() {
                    continue;
                }
                let tau = (p - h) / rel;
                if tau > T::zero() && tau < dt_step {
                    dt_step = tau;
                    hit = Some(i);
                }
            }
            match hit {
                Some(i) => {
                    let f = &slab.fronts[i];
                    (f.pos + f.speed * (t + dt_step - slab.t0), v)
                }
                None => (h + v * dt_step, v),
            }
        };

        t = t + dt_step;
        h = h_new;
        times.push(t);
        positions.push(h);
        velocities.push(v_used);
    }

    Ok(ShiftPath::from_parts(times, positions, velocities, eps))
}

/// `V_eps` for a fixed state of `u` with the classical pair evaluated at
/// `(x, t)`.
fn field_at_state<T: Real>(
    model: &FluxEntropyModel<T>,
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
    eps: T,
    state: T,
    x: T,
    t: T,
) -> Result<T> {
    let b1 = ubar1.evaluate(x, t)?;
    let b2 = ubar2.evaluate(x, t)?.min(b1);
    model.v_epsilon(state, b1, b2, eps)
}

/// Samples the dissipation functional
///
/// ```text
///     D(t) = q(u+; ubar2) - q(u-; ubar1) - hdot (eta(u+|ubar2) - eta(u-|ubar1))
/// ```
///
/// along the path, with `hdot` taken from the Filippov selection at the
/// sampled point (front speed on a front, `V_eps` elsewhere; the stored
/// segment velocities converge to this selection as the step shrinks).
/// Returns `(t, x, D)` triples, one per path segment, evaluated at the
/// segment midpoint so captured segments sit exactly on their front.
pub fn dissipation_along<T: Real>(
    u: &FrontSolution<T>,
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
    path: &ShiftPath<T>,
) -> Result<Vec<(T, T, T)>> {
    if path.t_end() > u.horizon() {
        return Err(Error::Horizon {
            t: path.t_end().as_f64(),
            horizon: u.horizon().as_f64(),
        });
    }
    let model = u.model().clone();
    let two = T::of(2.0);
    let mut out = Vec::with_capacity(path.velocities().len());
    for i in 0..path.velocities().len() {
        let (t0, t1) = (path.times()[i], path.times()[i + 1]);
        let tm = (t0 + t1) / two;
        let xm = path.eval(tm)?;
        let (um, up) = u.trace(xm, tm)?;
        let b1 = ubar1.evaluate(xm, tm)?;
        let b2 = ubar2.evaluate(xm, tm)?.min(b1);
        let hdot = if um == up {
            model.v_epsilon(um, b1, b2, path.eps())?
        } else {
            model.rh_speed(um, up)?
        };
        let d = model.relative_flux(up, b2)? - model.relative_flux(um, b1)?
            - hdot * (model.relative_entropy(up, b2)? - model.relative_entropy(um, b1)?);
        out.push((tm, xm, d));
    }
    Ok(out)
}

/// Mollified-velocity integrator: `hdot = v_n(h, t)` with
///
/// ```text
///     v_n(x, t) = int_0^1 V_eps(u(x + y/n, t), ubar1(x + y/n, t), ubar2(x + y/n, t)) dy,
/// ```
///
/// the integral approximated by 32 midpoint nodes. Steps are explicit
/// midpoint with `dt = min(1e-3 * span, 0.3 / (n * speed_sup))`; the
/// field's stiffness grows like `n`, hence the cap. Used as an
/// independent cross-check of [`build_shift`].
pub fn mollified_shift<T: Real>(
    u: &FrontSolution<T>,
    ubar1: &ClassicalSolution<T>,
    ubar2: &ClassicalSolution<T>,
    t_star: T,
    x0: T,
    eps: T,
    t_end: T,
    n: usize,
) -> Result<ShiftPath<T>> {
    if n == 0 {
        return Err(Error::Parameter("mollification index must be positive".into()));
    }
    if !(eps >= T::zero()) {
        return Err(Error::Parameter("shift budget must be nonnegative".into()));
    }
    if !(t_star >= T::zero()) || !(t_end >= t_star) {
        return Err(Error::Parameter("need 0 <= t_star <= t_end".into()));
    }
    if t_end > u.horizon() {
        return Err(Error::Horizon { t: t_end.as_f64(), horizon: u.horizon().as_f64() });
    }
    check_datum_order(ubar1, ubar2)?;
    let model = u.model().clone();
    let span = t_end - t_star;
    if !(span > T::zero()) {
        return Ok(ShiftPath::from_parts(vec![t_star], vec![x0], Vec::new(), eps));
    }
    let s0 = speed_sup(&model);
    let nodes = 32usize;
    let inv_n = T::one() / T::of(n as f64);
    let avg_field = |x: T, t: T| -> Result<T> {
        let mut acc = T::zero();
        for j in 0..nodes {
            let y = T::of((j as f64 + 0.5) / nodes as f64);
            acc = acc + field_velocity(&model, u, ubar1, ubar2, eps, x + y * inv_n, t)?;
        }
        Ok(acc / T::of(nodes as f64))
    };

    let dt_cap = T::of(0.3) / (T::of(n as f64) * s0.max(T::of(1e-12)));
    let dt = (span * T::of(SHIFT_DT_FACTOR)).min(dt_cap);
    let two = T::of(2.0);

    let mut times = vec![t_star];
    let mut positions = vec![x0];
    let mut velocities = Vec::new();
    let mut t = t_star;
    let mut h = x0;
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > MAX_SHIFT_STEPS {
            return Err(Error::EventOverflow { max: MAX_SHIFT_STEPS });
        }
        let dt_step = dt.min(t_end - t);
        let k1 = avg_field(h, t)?;
        let k2 = avg_field(h + k1 * (dt_step / two), t + dt_step / two)?;
        h = h + k2 * dt_step;
        t = t + dt_step;
        times.push(t);
        positions.push(h);
        velocities.push(k2);
    }
    Ok(ShiftPath::from_parts(times, positions, velocities, eps))
}
