//! Piecewise monotone-Lipschitz approximation with downward jumps.
//!
//! A `LiwasFn` is a function on the window `[-M, M]` given by finitely
//! many jump points, all strictly inside the window, with a nondecreasing
//! Lipschitz piece between consecutive jumps and only downward jumps.
//! Functions of this form are dense in L2 of the window; [`build_liwas`]
//! realizes a constructive approximation:
//!
//! 1. project onto piecewise constants over an adaptively refined dyadic
//!    partition until the L2 error is below `eps/2` (with headroom);
//! 2. split the step function into its upward part and the rest;
//! 3. mollify the upward part into monotone ramps narrow enough that the
//!    exact mollification error is also below `eps/2`.
//!
//! Step 3 uses a standard even bump sampled to a piecewise-linear CDF at
//! 64 intervals per support, so the output stays representable by
//! [`MonotoneLipschitzFn`] pieces and the mollification error has a
//! closed form.
//!
//! [`layer_decompose`] turns a `LiwasFn` into the ordered family of
//! globally monotone Lipschitz layers that agree with it between
//! consecutive jumps: each layer extends its piece rightward by a running
//! maximum and leftward by clipping against the previous layer.

use crate::error::{Error, Result};
use crate::piecewise::MonotoneLipschitzFn;
use crate::scalar::Real;

/// Midpoint nodes used for per-cell averages and error estimates.
const CELL_NODES: usize = 128;

/// Intervals per mollifier support in the piecewise-linear CDF.
const PHI_INTERVALS: usize = 64;

/// Leaf-count cap for the adaptive projection.
const MAX_LEAVES: usize = 200_000;

/// Piecewise monotone-Lipschitz function with downward jumps on
/// `[-window, window]`.
#[derive(Debug, Clone)]
pub struct LiwasFn<T: Real> {
    jumps: Vec<T>,
    pieces: Vec<MonotoneLipschitzFn<T>>,
    window: T,
}

impl<T: Real> LiwasFn<T> {
    /// Validates the invariants: one more piece than jumps, jump points
    /// strictly increasing and strictly inside the window, and every jump
    /// going downward.
    pub fn new(jumps: Vec<T>, pieces: Vec<MonotoneLipschitzFn<T>>, window: T) -> Result<Self> {
        if !(window > T::zero()) {
            return Err(Error::Parameter("window must be positive".into()));
        }
        if pieces.len() != jumps.len() + 1 {
            return Err(Error::Parameter(format!(
                "need one more piece than jumps, got {} pieces and {} jumps",
                pieces.len(),
                jumps.len()
            )));
        }
        for (i, &x) in jumps.iter().enumerate() {
            if !(x > -window && x < window) {
                return Err(Error::OutOfDomain {
                    value: x.as_f64(),
                    lo: (-window).as_f64(),
                    hi: window.as_f64(),
                });
            }
            if i > 0 && !(x > jumps[i - 1]) {
                return Err(Error::Ordering("jump points must increase strictly".into()));
            }
            let tol = T::of(1e-12);
            if pieces[i].eval(x) < pieces[i + 1].eval(x) - tol {
                return Err(Error::Ordering(format!(
                    "upward jump at x = {}",
                    x.as_f64()
                )));
            }
        }
        Ok(Self { jumps, pieces, window })
    }

    pub fn jumps(&self) -> &[T] {
        &self.jumps
    }

    pub fn pieces(&self) -> &[MonotoneLipschitzFn<T>] {
        &self.pieces
    }

    pub fn window(&self) -> T {
        self.window
    }

    fn piece_index(&self, x: T) -> usize {
        self.jumps.partition_point(|&j| j <= x)
    }

    /// Value at `x`, right-continuous at jumps, constant beyond the
    /// window.
    pub fn eval(&self, x: T) -> T {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Left limit at jump `i`.
    pub fn left_limit(&self, i: usize) -> T {
        self.pieces[i].eval(self.jumps[i])
    }

    /// Right limit at jump `i`.
    pub fn right_limit(&self, i: usize) -> T {
        self.pieces[i + 1].eval(self.jumps[i])
    }

    /// Exact sup norm over the window.
    pub fn sup_norm(&self) -> T {
        self.pieces
            .iter()
            .fold(T::zero(), |acc, p| acc.max(p.min_value().abs()).max(p.max_value().abs()))
    }

    /// Largest piece Lipschitz constant.
    pub fn max_lipschitz(&self) -> T {
        self.pieces
            .iter()
            .fold(T::zero(), |acc, p| acc.max(p.lipschitz()))
    }

    /// All breakpoints (jumps and piece knots) inside the window, sorted.
    pub fn breakpoints(&self) -> Vec<T> {
        let mut xs: Vec<T> = Vec::new();
        xs.push(-self.window);
        for p in &self.pieces {
            for &x in p.xs() {
                if x > -self.window && x < self.window {
                    xs.push(x);
                }
            }
        }
        xs.extend(self.jumps.iter().copied());
        xs.push(self.window);
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        xs.dedup_by(|a, b| *a == *b);
        xs
    }

    /// L2 distance to `f` over the window by composite Simpson between
    /// breakpoints. Each interval is owned by a single piece, selected at
    /// the interval midpoint, so endpoint samples are one-sided limits
    /// rather than the right-continuous value across a jump. Accurate when
    /// `f` is smooth between the approximant's own breakpoints; callers
    /// with known extra discontinuities of `f` should integrate piecewise
    /// themselves.
    pub fn l2_distance(&self, f: &dyn Fn(T) -> T, panels_per_interval: usize) -> T {
        let xs = self.breakpoints();
        let panels = panels_per_interval.max(1);
        let mut total = T::zero();
        let six = T::of(6.0);
        let four = T::of(4.0);
        let two = T::of(2.0);
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                continue;
            }
            let piece = &self.pieces[self.piece_index((a + b) / two)];
            let h = (b - a) / T::of(panels as f64);
            for k in 0..panels {
                let lo = a + h * T::of(k as f64);
                let hi = lo + h;
                let g = |x: T| {
                    let d = f(x) - piece.eval(x);
                    d * d
                };
                total = total + h / six * (g(lo) + four * g((lo + hi) / two) + g(hi));
            }
        }
        total.max(T::zero()).sqrt()
    }
}

/// Piecewise-linear CDF of the standard even bump `exp(-1/(1 - y^2))` on
/// `[-1, 1]`, sampled at `PHI_INTERVALS + 1` equispaced knots and
/// normalized so the last value is exactly 1.
fn bump_cdf<T: Real>() -> Vec<T> {
    let n = PHI_INTERVALS;
    let m = |y: f64| {
        if y.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - y * y)).exp()
        }
    };
    // Composite Simpson on each knot interval.
    let mut cdf = vec![0.0f64; n + 1];
    let h = 2.0 / n as f64;
    for i in 0..n {
        let a = -1.0 + i as f64 * h;
        let b = a + h;
        cdf[i + 1] = cdf[i] + h / 6.0 * (m(a) + 4.0 * m(0.5 * (a + b)) + m(b));
    }
    let total = cdf[n];
    cdf.iter().map(|&v| T::of(v / total)).collect()
}

/// Squared L2 distance between the piecewise-linear CDF ramp and the unit
/// step on `[-1, 1]`, exact for the sampled representation.
fn ramp_step_l2sq<T: Real>(cdf: &[T]) -> T {
    let n = cdf.len() - 1;
    let h = T::of(2.0 / n as f64);
    let six = T::of(6.0);
    let four = T::of(4.0);
    let two = T::of(2.0);
    let mut total = T::zero();
    for i in 0..n {
        let y0 = T::of(-1.0 + 2.0 * i as f64 / n as f64);
        let heavi = if y0 >= T::zero() { T::one() } else { T::zero() };
        let g = |s: T| {
            // s in [0,1] within the interval; PL value minus step.
            let v = cdf[i] + (cdf[i + 1] - cdf[i]) * s - heavi;
            v * v
        };
        total = total + h / six * (g(T::zero()) + four * g(T::one() / two) + g(T::one()));
    }
    total
}

/// Mollifies a nondecreasing step function (`base` plus positive jumps at
/// strictly increasing positions) into a piecewise-linear monotone ramp
/// function. Requires `2 * delta` below every gap between consecutive
/// jump positions so ramps stay disjoint.
pub fn mollify_up_jumps<T: Real>(
    base: T,
    ups: &[(T, T)],
    delta: T,
) -> Result<MonotoneLipschitzFn<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::Parameter("mollification width must be positive".into()));
    }
    for (i, &(x, j)) in ups.iter().enumerate() {
        if !(j > T::zero()) {
            return Err(Error::Parameter("up-jumps must be positive".into()));
        }
        if i > 0 {
            let gap = x - ups[i - 1].0;
            if !(gap > delta * T::of(2.0)) {
                return Err(Error::Parameter(format!(
                    "delta {} too large for jump gap {}",
                    delta.as_f64(),
                    gap.as_f64()
                )));
            }
        }
    }
    if ups.is_empty() {
        return Ok(MonotoneLipschitzFn::constant(base));
    }
    let cdf = bump_cdf::<T>();
    let n = PHI_INTERVALS;
    let mut points: Vec<(T, T)> = Vec::with_capacity(ups.len() * (n + 1));
    let mut acc = base;
    for &(x, j) in ups {
        for (i, &c) in cdf.iter().enumerate() {
            let y = T::of(-1.0 + 2.0 * i as f64 / n as f64);
            points.push((x + delta * y, acc + j * c));
        }
        acc = acc + j;
    }
    MonotoneLipschitzFn::new(points)
}

struct Cell<T> {
    lo: T,
    hi: T,
    avg: T,
    err2: T,
}

fn cell_stats<T: Real>(f: &dyn Fn(T) -> T, lo: T, hi: T) -> (T, T) {
    let n = CELL_NODES;
    let w = hi - lo;
    let h = w / T::of(n as f64);
    let mut sum = T::zero();
    let mut vals = Vec::with_capacity(n + 2);
    // Boundary samples: midpoints alone are blind to features hugging a
    // cell edge (a jump just inside the boundary hides between the edge
    // and the first node). The left edge belongs to the cell; the right
    // sample is pulled inside so a jump sitting exactly on the shared
    // boundary is not charged to this cell.
    vals.push(f(lo));
    vals.push(f(hi - w * T::of(1e-9)));
    for i in 0..n {
        let v = f(lo + h * T::of(i as f64 + 0.5));
        vals.push(v);
    }
    for &v in &vals {
        sum = sum + v;
    }
    let avg = sum / T::of(vals.len() as f64);
    let mut err2 = T::zero();
    for v in vals.iter() {
        let d = *v - avg;
        err2 = err2 + d * d;
    }
    (avg, err2 * w / T::of(vals.len() as f64))
}

/// Constructs a `LiwasFn` within L2 distance `eps` of `f` on `[-m, m]`,
/// with sup norm bounded by the sampled sup of `f` and all jumps strictly
/// inside the window.
pub fn build_liwas<T: Real>(f: &dyn Fn(T) -> T, m: T, eps: T) -> Result<LiwasFn<T>> {
    if !(m > T::zero()) || !m.is_finite() {
        return Err(Error::Parameter("window must be positive".into()));
    }
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::Parameter(format!(
            "approximation budget must be positive, got {}",
            eps.as_f64()
        )));
    }
    let half_target = eps * T::of(0.45);
    let target2 = half_target * half_target;

    // Stage 1: adaptive dyadic piecewise-constant projection.
    let mut cells: Vec<Cell<T>> = Vec::new();
    let init = 16usize;
    let w0 = (m + m) / T::of(init as f64);
    let mut total2 = T::zero();
    for i in 0..init {
        let lo = -m + w0 * T::of(i as f64);
        let hi = if i + 1 == init { m } else { lo + w0 };
        let (avg, err2) = cell_stats(f, lo, hi);
        total2 = total2 + err2;
        cells.push(Cell { lo, hi, avg, err2 });
    }
    while total2 > target2 {
        if cells.len() >= MAX_LEAVES {
            return Err(Error::Refinement(format!(
                "step projection exceeded {} cells at L2 error {}",
                MAX_LEAVES,
                total2.max(T::zero()).sqrt().as_f64()
            )));
        }
        let mut worst = 0usize;
        for (i, c) in cells.iter().enumerate() {
            if c.err2 > cells[worst].err2 {
                worst = i;
            }
        }
        let Cell { lo, hi, err2, .. } = cells[worst];
        let mid = (lo + hi) / T::of(2.0);
        if !(mid > lo && mid < hi) {
            return Err(Error::Refinement(
                "step projection hit floating-point resolution".into(),
            ));
        }
        let (avg_l, err_l) = cell_stats(f, lo, mid);
        let (avg_r, err_r) = cell_stats(f, mid, hi);
        total2 = total2 - err2 + err_l + err_r;
        cells[worst] = Cell { lo, hi: mid, avg: avg_l, err2: err_l };
        cells.push(Cell { lo: mid, hi, avg: avg_r, err2: err_r });
    }
    cells.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite cells"));

    // Stage 2: classify boundaries into up- and down-jumps.
    let scale = cells
        .iter()
        .fold(T::one(), |acc, c| acc.max(c.avg.abs()));
    let jtol = scale * T::of(1e-12);
    let mut ups: Vec<(T, T)> = Vec::new();
    let mut downs: Vec<(T, T)> = Vec::new();
    for i in 0..cells.len() - 1 {
        let d = cells[i + 1].avg - cells[i].avg;
        let x = cells[i].hi;
        if d > jtol {
            ups.push((x, d));
        } else if d < -jtol {
            downs.push((x, d));
        }
    }

    // Stage 3: mollification width small enough for disjoint ramps away
    // from down-jumps and the window edge, then halved until the exact
    // ramp error fits the remaining budget.
    let mut w = MonotoneLipschitzFn::constant(T::zero());
    if !ups.is_empty() {
        let mut min_gap = T::infinity();
        let mut all: Vec<T> = ups.iter().map(|&(x, _)| x).collect();
        all.extend(downs.iter().map(|&(x, _)| x));
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite jump positions"));
        for pair in all.windows(2) {
            min_gap = min_gap.min(pair[1] - pair[0]);
        }
        min_gap = min_gap.min(all[0] + m).min(m - *all.last().expect("nonempty"));
        let mut delta = min_gap * T::of(0.45);
        let cdf = bump_cdf::<T>();
        let c_phi = ramp_step_l2sq(&cdf);
        let jsq = ups.iter().fold(T::zero(), |acc, &(_, j)| acc + j * j);
        let mut rounds = 0usize;
        while c_phi * delta * jsq > target2 {
            delta = delta / T::of(2.0);
            rounds += 1;
            if rounds > 200 {
                return Err(Error::Refinement("mollification width underflow".into()));
            }
        }
        w = mollify_up_jumps(T::zero(), &ups, delta)?;
    }

    // Stage 4: assemble pieces between down-jumps: constant offset from
    // the downward part plus the shared monotone ramp function.
    let base = cells[0].avg;
    // Cell boundaries are strictly increasing, so down positions are too.
    let jump_positions: Vec<T> = downs.iter().map(|&(x, _)| x).collect();
    let mut pieces = Vec::with_capacity(jump_positions.len() + 1);
    let mut offset = base;
    for cell_idx in 0..=jump_positions.len() {
        let lo = if cell_idx == 0 { -m } else { jump_positions[cell_idx - 1] };
        let hi = if cell_idx == jump_positions.len() { m } else { jump_positions[cell_idx] };
        let mut knots: Vec<T> = vec![lo];
        for &x in w.xs() {
            if x > lo && x < hi {
                knots.push(x);
            }
        }
        knots.push(hi);
        knots.dedup_by(|a, b| *a == *b);
        let pts: Vec<(T, T)> = knots.into_iter().map(|x| (x, offset + w.eval(x))).collect();
        pieces.push(MonotoneLipschitzFn::new(pts)?);
        if cell_idx < jump_positions.len() {
            offset = offset + downs[cell_idx].1;
        }
    }
    LiwasFn::new(jump_positions, pieces, m)
}

/// Ordered monotone layers of a `LiwasFn`.
///
/// Layer `i` equals the function between jumps `i-1` and `i`, continues
/// rightward as the running maximum of the sampled function values, and
/// continues leftward clipped from above by the previous layer. The
/// result is a pointwise nonincreasing family of nondecreasing Lipschitz
/// functions, each within the function's sup-norm bound.
pub fn layer_decompose<T: Real>(v0: &LiwasFn<T>) -> Result<Vec<MonotoneLipschitzFn<T>>> {
    let knots = v0.breakpoints();
    let jumps = v0.jumps();
    let n_layers = jumps.len() + 1;
    let mut layers: Vec<MonotoneLipschitzFn<T>> = Vec::with_capacity(n_layers);
    let mut prev_vals: Vec<T> = Vec::new();
    for i in 0..n_layers {
        let cell_lo = if i == 0 { None } else { Some(jumps[i - 1]) };
        let cell_hi = if i == jumps.len() { None } else { Some(jumps[i]) };
        let mut vals = Vec::with_capacity(knots.len());
        let mut running: Option<T> = None;
        for (k, &x) in knots.iter().enumerate() {
            let below = cell_lo.map(|lo| x < lo).unwrap_or(false);
            let above = cell_hi.map(|hi| x > hi).unwrap_or(false);
            let v = if below {
                // Left extension: clip the cell's left value by the
                // previous layer.
                v0.pieces()[i].eval(cell_lo.expect("left edge")).min(prev_vals[k])
            } else if above {
                let hi = cell_hi.expect("right edge");
                let r = running.unwrap_or_else(|| v0.pieces()[i].eval(hi)).max(v0.eval(x));
                running = Some(r);
                r
            } else {
                v0.pieces()[i].eval(x)
            };
            vals.push(v);
        }
        let pts: Vec<(T, T)> = knots.iter().copied().zip(vals.iter().copied()).collect();
        layers.push(MonotoneLipschitzFn::new(pts)?);
        prev_vals = vals;
    }
    Ok(layers)
}
