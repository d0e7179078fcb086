//! End-to-end construction of the comparison function psi.
//!
//! Given a front-tracking solution `u` on `[0, T]`, [`build_psi`] produces
//! a piecewise monotone-Lipschitz function psi on `[-R, R]` whose weighted
//! relative entropy against `u(., T)` is below a prescribed budget `eps`,
//! whose one-sided slope satisfies the Oleinik bound `1/(inf A'' * T)`,
//! and whose sup norm does not exceed that of `u`. The construction:
//!
//! 1. fit the initial datum of `u` on the widened window
//!    `[-R - sT, R + sT]` by a `LiwasFn` whose L2 error keeps the initial
//!    relative entropy below `eps/4`;
//! 2. decompose it into ordered monotone layers and evolve each layer
//!    classically (monotone data stay classical for all time);
//! 3. separate consecutive layers by Filippov shifts with per-shift
//!    dissipation budget `eps / (4 T (L+1))`, plus two boundary cones
//!    moving inward at the domination speed `s`, so boundary terms only
//!    absorb entropy;
//! 4. whenever two boundaries meet (within `coll_tol = 1e-8 R`), merge
//!    the collided block, drop the layers in between, and restart the
//!    stage from the collision time;
//! 5. at time `T`, read off the surviving boundaries and sample the
//!    owning layer on each cell.
//!
//! The budget ledger: initial fit contributes at most `eps/4`, the shifts
//! at most `eps/4` in total, leaving a factor-two margin against
//! quadrature and sampling error. [`relative_entropy_total`],
//! [`detect_collision`], and [`certify_monotone_decay`] are the reusable
//! certificate primitives behind the construction.

use std::sync::Arc;

use crate::classical::ClassicalSolution;
use crate::error::{Error, Result};
use crate::flux_entropy::FluxEntropyModel;
use crate::front_tracking::FrontSolution;
use crate::liwas::{build_liwas, layer_decompose, LiwasFn};
use crate::piecewise::MonotoneLipschitzFn;
use crate::quad::adaptive_simpson;
use crate::scalar::Real;
use crate::shift::{build_shift, ShiftPath};

/// Intervals of the shared time grid used for collision detection.
pub const COLLISION_GRID: usize = 2000;

/// Collision tolerance as a fraction of the half-window `R`.
pub const COLL_TOL_FACTOR: f64 = 1e-8;

/// Sample points per psi piece.
const PSI_SAMPLES: usize = 600;

/// Safety factor for derived model constants.
const CONSTANTS_SAFETY: f64 = 1.1;

/// One collision event: the sampled time and the maximal merged blocks,
/// as inclusive index pairs into that stage's full boundary list (index 0
/// is the left cone, the last index the right cone).
#[derive(Debug, Clone)]
pub struct MergeEvent<T: Real> {
    pub time: T,
    pub pairs: Vec<(usize, usize)>,
}

/// Result of [`build_psi`].
#[derive(Debug, Clone)]
pub struct PsiResult<T: Real> {
    /// The comparison function on `[-R, R]`.
    pub psi: LiwasFn<T>,
    /// Final boundary positions `-R = x_0 <= x_1 <= ... <= x_{N+1} = R`,
    /// one per original layer interface plus the window ends; merged
    /// interfaces repeat their common position, cone-absorbed ones sit at
    /// the window ends.
    pub boundaries: Vec<T>,
    /// Relative entropy of `u(., T)` against the evolved layers over the
    /// final cells.
    pub rel_entropy_total: T,
    /// Oleinik constant `c` such that `psi(x+z) - psi(x) <= (c/T) z`,
    /// i.e. the maximal slope of psi times `T`.
    pub oleinik_modulus: T,
    /// Sup norm of psi over the window.
    pub sup_norm: T,
    /// Collision events, in time order.
    pub merge_log: Vec<MergeEvent<T>>,
    /// Requested entropy budget.
    pub eps: T,
    /// L2 fit target used for the initial datum approximation.
    pub fit_target: T,
    /// Dissipation budget given to each interior shift.
    pub shift_eps: T,
    /// Cone speed (relative-flux domination constant).
    pub cone_speed: T,
}

/// Earliest sampled time at which two adjacent paths come within `tol`
/// (or invert), together with the maximal blocks of collided indices at
/// that time. Returns the final grid time and no pairs when the paths
/// stay separated. The grid must lie within every path's span.
pub fn detect_collision<T: Real>(
    paths: &[ShiftPath<T>],
    times: &[T],
    tol: T,
) -> Result<(T, Vec<(usize, usize)>)> {
    if times.is_empty() {
        return Err(Error::Parameter("collision grid must be nonempty".into()));
    }
    let t_last = *times.last().expect("nonempty grid");
    if paths.len() < 2 {
        return Ok((t_last, Vec::new()));
    }
    for &t in times {
        let pos: Vec<T> = paths.iter().map(|p| p.eval(t)).collect::<Result<_>>()?;
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        for i in 0..pos.len() - 1 {
            if pos[i + 1] - pos[i] <= tol {
                match blocks.last_mut() {
                    Some(last) if last.1 == i => last.1 = i + 1,
                    _ => blocks.push((i, i + 1)),
                }
            }
        }
        if !blocks.is_empty() {
            return Ok((t, blocks));
        }
    }
    Ok((t_last, Vec::new()))
}

fn front_cuts<T: Real>(u: &FrontSolution<T>, a: T, b: T, t: T) -> Result<Vec<T>> {
    let mut cuts = vec![a];
    for f in u.fronts_at(t)? {
        if f.pos > a && f.pos < b {
            cuts.push(f.pos);
        }
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite front positions"));
    Ok(cuts)
}

/// Integral of `eta(u(x, t) | v(x, t)) dx` over `[a, b]`, split exactly at
/// the fronts of `u` so every piece has a smooth integrand.
fn entropy_mismatch<T: Real>(
    model: &FluxEntropyModel<T>,
    u: &FrontSolution<T>,
    v: &ClassicalSolution<T>,
    a: T,
    b: T,
    t: T,
) -> Result<T> {
    if !(b > a) {
        return Ok(T::zero());
    }
    let cuts = front_cuts(u, a, b, t)?;
    let two = T::of(2.0);
    let mut total = T::zero();
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(q > p) {
            continue;
        }
        let state = u.eval((p + q) / two, t)?;
        model.check_state(state)?;
        let f = |x: T| {
            let bar = v
                .evaluate(x, t)
                .expect("classical evaluation inside validated window");
            model.entropy(state) - model.entropy(bar) - model.dentropy(bar) * (state - bar)
        };
        total = total + adaptive_simpson(&f, p, q, model.quad_tol())?;
    }
    Ok(total)
}

/// Total relative entropy of `u(., t)` against the layer family over the
/// cells delimited by `boundaries` (one more boundary than layers,
/// nondecreasing). Zero-width cells contribute nothing.
pub fn relative_entropy_total<T: Real>(
    model: &FluxEntropyModel<T>,
    u: &FrontSolution<T>,
    layers: &[ClassicalSolution<T>],
    boundaries: &[T],
    t: T,
) -> Result<T> {
    if boundaries.len() != layers.len() + 1 {
        return Err(Error::Parameter(format!(
            "need one more boundary than layers, got {} boundaries for {} layers",
            boundaries.len(),
            layers.len()
        )));
    }
    for w in boundaries.windows(2) {
        if w[1] < w[0] - T::of(1e-12) * T::one().max(w[0].abs()) {
            return Err(Error::Ordering(format!(
                "boundaries must be nondecreasing: {} after {}",
                w[1].as_f64(),
                w[0].as_f64()
            )));
        }
    }
    let mut total = T::zero();
    for (i, v) in layers.iter().enumerate() {
        total = total + entropy_mismatch(model, u, v, boundaries[i], boundaries[i + 1], t)?;
    }
    Ok(total.max(T::zero()))
}

/// Report of [`certify_monotone_decay`].
#[derive(Debug, Clone)]
pub struct DecayReport<T: Real> {
    pub times: Vec<T>,
    /// `G(t)`: relative entropy over the (possibly shrinking) window.
    pub raw: Vec<T>,
    /// `G(t) - C (t - t_0)` with `C` the sampled influx bound; must be
    /// nonincreasing when the interior production is dissipative.
    pub corrected: Vec<T>,
    /// The influx bound `C`.
    pub influx_bound: T,
    /// Indices `k` with `corrected[k+1] > corrected[k] + tol`.
    pub violations: Vec<usize>,
    pub flagged: bool,
}

/// Monitors `G(t) = int_{c + w(t-t0)}^{d - w(t-t0)} eta(u | ubar) dx`
/// (`w` = `shrink_speed`) on the sampled times, bounds the boundary
/// influx by
///
/// ```text
///     C = max_t [ q(u(a+); ubar(a)) - q(u(b-); ubar(b))
///                 - w (eta(u(a+)|ubar(a)) + eta(u(b-)|ubar(b))) ],
/// ```
///
/// and flags any rise of `G(t) - C (t - t0)` beyond `tol`: for an
/// entropy-dissipative `u` the interior production is nonpositive, so a
/// flagged report certifies non-entropic behavior inside the window.
pub fn certify_monotone_decay<T: Real>(
    model: &FluxEntropyModel<T>,
    u: &FrontSolution<T>,
    ubar: &ClassicalSolution<T>,
    interval: (T, T),
    times: &[T],
    shrink_speed: T,
    tol: T,
) -> Result<DecayReport<T>> {
    let (c, d) = interval;
    if !(d > c) {
        return Err(Error::Parameter("interval must have positive width".into()));
    }
    if !(shrink_speed >= T::zero()) {
        return Err(Error::Parameter("shrink speed must be nonnegative".into()));
    }
    if times.len() < 2 {
        return Err(Error::Parameter("need at least two sample times".into()));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Ordering("sample times must increase".into()));
        }
    }
    let t0 = times[0];
    let mut raw = Vec::with_capacity(times.len());
    let mut influx = -T::infinity();
    for &t in times {
        let a = c + shrink_speed * (t - t0);
        let b = d - shrink_speed * (t - t0);
        if !(b > a) {
            return Err(Error::Parameter(format!(
                "window collapses before t = {}",
                t.as_f64()
            )));
        }
        raw.push(entropy_mismatch(model, u, ubar, a, b, t)?.max(T::zero()));
        let ua = u.trace(a, t)?.1;
        let ub = u.trace(b, t)?.0;
        let bar_a = ubar.evaluate(a, t)?;
        let bar_b = ubar.evaluate(b, t)?;
        let flux_in = model.relative_flux(ua, bar_a)? - model.relative_flux(ub, bar_b)?
            - shrink_speed
                * (model.relative_entropy(ua, bar_a)? + model.relative_entropy(ub, bar_b)?);
        influx = influx.max(flux_in);
    }
    let corrected: Vec<T> = times
        .iter()
        .zip(raw.iter())
        .map(|(&t, &g)| g - influx * (t - t0))
        .collect();
    let mut violations = Vec::new();
    for k in 0..corrected.len() - 1 {
        if corrected[k + 1] > corrected[k] + tol {
            violations.push(k);
        }
    }
    let flagged = !violations.is_empty();
    Ok(DecayReport { times: times.to_vec(), raw, corrected, influx_bound: influx, violations, flagged })
}

/// Which fixed boundary, if any, an original interface was absorbed by.
enum Fate {
    LeftCone,
    RightCone,
}

/// Builds psi on `[-R, R]` at time `t_final` from the front solution `u`
/// with relative-entropy budget `eps`. See the module docs for the
/// algorithm and the budget split.
pub fn build_psi<T: Real>(
    model: &Arc<FluxEntropyModel<T>>,
    u: &FrontSolution<T>,
    t_final: T,
    r: T,
    eps: T,
) -> Result<PsiResult<T>> {
    if !(t_final > T::zero()) || !(r > T::zero()) || !(eps > T::zero()) {
        return Err(Error::Parameter("T, R, and eps must be positive".into()));
    }
    if t_final > u.horizon() {
        return Err(Error::Horizon { t: t_final.as_f64(), horizon: u.horizon().as_f64() });
    }
    let consts = model.derive_constants(T::of(CONSTANTS_SAFETY))?;
    let s = consts.s;
    let four = T::of(4.0);
    let window = r + s * t_final;

    // Stage 0: LIWAS fit of the initial datum on the widened window.
    let datum = |x: T| u.eval(x, T::zero()).expect("datum evaluation");
    let fit_target = (eps / (four * consts.c_dstar)).sqrt();
    let v0 = build_liwas(&datum, window, fit_target)?;
    let n_ifaces = v0.jumps().len();
    let layer_data = layer_decompose(&v0)?;
    let layer_sols: Vec<ClassicalSolution<T>> = layer_data
        .into_iter()
        .map(|l| ClassicalSolution::new(model.clone(), l))
        .collect::<Result<_>>()?;
    let shift_eps = eps / (four * t_final * T::of((n_ifaces + 1) as f64));
    let coll_tol = r * T::of(COLL_TOL_FACTOR);

    // Stage state: alive interfaces carry their original indices; alive
    // cells name the original layer they expose.
    let mut groups: Vec<Vec<usize>> = (0..n_ifaces).map(|i| vec![i]).collect();
    let mut cell_layers: Vec<usize> = (0..=n_ifaces).collect();
    let mut positions: Vec<T> = v0.jumps().to_vec();
    let mut fates: Vec<(usize, Fate)> = Vec::new();
    let mut merge_log: Vec<MergeEvent<T>> = Vec::new();
    let mut t0 = T::zero();

    let final_positions: Vec<T> = loop {
        if !(t0 < t_final) {
            break positions;
        }
        let k = positions.len();
        let mut all: Vec<ShiftPath<T>> = Vec::with_capacity(k + 2);
        all.push(ShiftPath::linear(t0, -r - s * (t_final - t0), s, t_final)?);
        for i in 0..k {
            all.push(build_shift(
                u,
                &layer_sols[cell_layers[i]],
                &layer_sols[cell_layers[i + 1]],
                t0,
                positions[i],
                shift_eps,
                t_final,
            )?);
        }
        all.push(ShiftPath::linear(t0, r + s * (t_final - t0), -s, t_final)?);

        let span = t_final - t0;
        let times: Vec<T> = (0..=COLLISION_GRID)
            .map(|i| {
                if i == COLLISION_GRID {
                    t_final
                } else {
                    t0 + span * T::of(i as f64 / COLLISION_GRID as f64)
                }
            })
            .collect();
        let (t_star, blocks) = detect_collision(&all, &times, coll_tol)?;
        if blocks.is_empty() {
            break (1..=k).map(|f| all[f].eval(t_final)).collect::<Result<_>>()?;
        }

        // Merge the collided blocks at t_star and restart from there.
        merge_log.push(MergeEvent { time: t_star, pairs: blocks.clone() });
        let mut in_block = vec![usize::MAX; k + 2];
        for (bi, &(a, b)) in blocks.iter().enumerate() {
            for f in a..=b {
                in_block[f] = bi;
            }
        }
        let mut new_positions: Vec<T> = Vec::new();
        let mut new_groups: Vec<Vec<usize>> = Vec::new();
        let mut new_cells: Vec<usize> = Vec::new();
        for c in 0..=k {
            let same = in_block[c] != usize::MAX && in_block[c] == in_block[c + 1];
            if !same {
                new_cells.push(cell_layers[c]);
            }
        }
        for f in 1..=k {
            let bi = in_block[f];
            if bi == usize::MAX {
                new_positions.push(all[f].eval(t_star)?);
                new_groups.push(groups[f - 1].clone());
                continue;
            }
            let (a, b) = blocks[bi];
            if a == 0 {
                fates.extend(groups[f - 1].iter().map(|&o| (o, Fate::LeftCone)));
            } else if b == k + 1 {
                fates.extend(groups[f - 1].iter().map(|&o| (o, Fate::RightCone)));
            } else if f == a {
                let mut pos_sum = T::zero();
                let mut combined: Vec<usize> = Vec::new();
                for g in a..=b {
                    pos_sum = pos_sum + all[g].eval(t_star)?;
                    combined.extend(groups[g - 1].iter().copied());
                }
                new_positions.push(pos_sum / T::of((b - a + 1) as f64));
                new_groups.push(combined);
            }
            // Non-representative members of an interior block fold into
            // the representative emitted at f == a.
        }
        positions = new_positions;
        groups = new_groups;
        cell_layers = new_cells;
        t0 = t_star;
    };

    // Final boundary per surviving interface, clamped into the window.
    let survived: Vec<T> = final_positions
        .iter()
        .map(|&x| x.max(-r).min(r))
        .collect();
    let mut per_original: Vec<Option<T>> = vec![None; n_ifaces];
    for (gi, group) in groups.iter().enumerate() {
        for &o in group {
            per_original[o] = Some(survived[gi]);
        }
    }
    for (o, fate) in &fates {
        per_original[*o] = Some(match fate {
            Fate::LeftCone => -r,
            Fate::RightCone => r,
        });
    }
    let mut boundaries = Vec::with_capacity(n_ifaces + 2);
    boundaries.push(-r);
    for o in per_original {
        boundaries.push(o.expect("every original interface is assigned"));
    }
    boundaries.push(r);
    for i in 1..boundaries.len() {
        boundaries[i] = boundaries[i].max(boundaries[i - 1]);
    }

    // Assemble psi from the cells of positive width.
    let mut edges = Vec::with_capacity(survived.len() + 2);
    edges.push(-r);
    edges.extend(survived.iter().copied());
    edges.push(r);
    for i in 1..edges.len() {
        edges[i] = edges[i].max(edges[i - 1]);
    }
    let mut kept: Vec<(T, T, usize)> = Vec::new();
    for (c, &layer) in cell_layers.iter().enumerate() {
        if edges[c + 1] > edges[c] {
            kept.push((edges[c], edges[c + 1], layer));
        }
    }
    if kept.is_empty() {
        return Err(Error::Refinement("no cell of positive width remains".into()));
    }
    let mut pieces: Vec<Vec<(T, T)>> = Vec::with_capacity(kept.len());
    for &(lo, hi, layer) in &kept {
        let n = PSI_SAMPLES;
        let mut pts = Vec::with_capacity(n + 1);
        let mut prev = -T::infinity();
        for i in 0..=n {
            let x = if i == n {
                hi
            } else {
                lo + (hi - lo) * T::of(i as f64 / n as f64)
            };
            // Running max absorbs root-solver noise on flat stretches.
            let v = layer_sols[layer].evaluate(x, t_final)?.max(prev);
            prev = v;
            pts.push((x, v));
        }
        pieces.push(pts);
    }
    // A junction may come out inverted by root noise; lift the left end.
    for i in 0..pieces.len() - 1 {
        let right_first = pieces[i + 1][0].1;
        let left_last = pieces[i].last().expect("sampled piece").1;
        if right_first > left_last {
            pieces[i].last_mut().expect("sampled piece").1 = right_first;
        }
    }
    let psi_jumps: Vec<T> = kept[..kept.len() - 1].iter().map(|&(_, hi, _)| hi).collect();
    let psi_pieces: Vec<MonotoneLipschitzFn<T>> = pieces
        .into_iter()
        .map(MonotoneLipschitzFn::new)
        .collect::<Result<_>>()?;
    let psi = LiwasFn::new(psi_jumps, psi_pieces, r)?;

    let rel_entropy_total =
        relative_entropy_total(model, u, &layer_sols, &boundaries, t_final)?;
    let oleinik_modulus = psi.max_lipschitz() * t_final;
    let sup_norm = psi.sup_norm();
    Ok(PsiResult {
        psi,
        boundaries,
        rel_entropy_total,
        oleinik_modulus,
        sup_norm,
        merge_log,
        eps,
        fit_target,
        shift_eps,
        cone_speed: s,
    })
}
