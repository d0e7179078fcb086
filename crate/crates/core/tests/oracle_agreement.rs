//! Agreement between the library's entropy functionals and independently
//! implemented reference computations: the symmetric double-integral form
//! of the shock dissipation, the Jensen form of the midlocus sign, and a
//! stand-alone splitting integrator for L2 distances. The references live
//! in `entroshift-testkit` and share no code with the library.

use std::sync::Arc;

use entroshift::{FluxEntropyModel, FrontSolution, LiwasFn, MonotoneLipschitzFn};
use entroshift_testkit as testkit;
use rand::Rng;

fn models() -> Vec<(&'static str, FluxEntropyModel<f64>)> {
    vec![
        ("burgers/square", FluxEntropyModel::burgers(2.5).unwrap()),
        ("quartic/cosh", FluxEntropyModel::quartic_cosh(2.5).unwrap()),
    ]
}

/// Random pair in `[-2, 2]^2` with the requested minimum separation.
fn separated_pair(rng: &mut impl Rng, min_gap: f64) -> (f64, f64) {
    loop {
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        if (a - b).abs() > min_gap {
            return (a, b);
        }
    }
}

#[test]
fn shock_dissipation_matches_the_double_integral_oracle() {
    for (name, model) in models() {
        let mut rng = testkit::rng(0x51c1);
        for _ in 0..300 {
            let (ul, ur) = separated_pair(&mut rng, 1e-3);
            let lam = model.shock_dissipation(ul, ur).unwrap();
            let oracle = testkit::shock_dissipation_oracle(
                |u| model.dentropy(u),
                |u| model.dflux(u),
                ul,
                ur,
            );
            assert!(
                (lam - oracle).abs() <= 1e-8,
                "{name}: Lambda({ul}, {ur}) = {lam} vs oracle {oracle}"
            );
            // Sign law: dissipative exactly for entropic (down) jumps.
            assert_eq!(lam < 0.0, ul > ur, "{name}: sign law at ({ul}, {ur})");
        }
    }
}

#[test]
fn relative_flux_is_dominated_by_the_speed_bound() {
    for (name, model) in models() {
        let s = model.derive_constants(1.0).unwrap().s;
        let mut rng = testkit::rng(0xd0b1);
        for _ in 0..400 {
            let a = rng.random_range(-2.4..2.4);
            let b = rng.random_range(-2.4..2.4);
            let q = model.relative_flux(a, b).unwrap();
            let eta = model.relative_entropy(a, b).unwrap();
            assert!(
                q.abs() <= s * eta + 1e-10,
                "{name}: |q({a};{b})| = {} > s eta = {}",
                q.abs(),
                s * eta
            );
        }
    }
}

/// Shifted Rankine-Hugoniot dissipation: for any entropic shock
/// `(u_minus, u_plus)` riding at its own speed, measured against any
/// ordered pair of reference states, the relative-entropy production is
/// nonpositive.
#[test]
fn shock_riding_dissipation_is_nonpositive_on_random_quadruples() {
    for (name, model) in models() {
        let mut rng = testkit::rng(0xabcd);
        for _ in 0..300 {
            let (a, b) = separated_pair(&mut rng, 1e-3);
            let (um, up) = (a.max(b), a.min(b));
            let (c, d) = separated_pair(&mut rng, 0.0);
            let (ul, ur) = (c.max(d), c.min(d));
            let sigma = model.rh_speed(um, up).unwrap();
            let d_rh = model.relative_flux(up, ur).unwrap()
                - model.relative_flux(um, ul).unwrap()
                - sigma
                    * (model.relative_entropy(up, ur).unwrap()
                        - model.relative_entropy(um, ul).unwrap());
            assert!(d_rh <= 1e-9, "{name}: d_rh = {d_rh} at ({um},{up};{ul},{ur})");
        }
    }
}

/// Root of `eta(u|ul) = eta(u|ur)` in `(ur, ul)`; the difference is
/// strictly decreasing in `u`, so bisection is safe.
fn midlocus(model: &FluxEntropyModel<f64>, ul: f64, ur: f64) -> f64 {
    let g = |u: f64| {
        model.relative_entropy(u, ul).unwrap() - model.relative_entropy(u, ur).unwrap()
    };
    let (mut lo, mut hi) = (ur, ul);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// At the equal-relative-entropy point the flux difference
/// `q(u;ur) - q(u;ul)` equals `int eta''(v) (A(u) - A(v)) dv` over
/// `[ur, ul]`; the midlocus condition makes `u` the `eta''`-weighted mean
/// of `v`, so strict convexity of `A` (Jensen) forces a negative sign.
#[test]
fn midlocus_flux_difference_is_negative_and_matches_the_jensen_form() {
    for (name, model) in models() {
        let mut rng = testkit::rng(0x3e57);
        for _ in 0..120 {
            let (a, b) = separated_pair(&mut rng, 1e-2);
            let (ul, ur) = (a.max(b), a.min(b));
            let u = midlocus(&model, ul, ur);
            let eq = model.relative_entropy(u, ul).unwrap()
                - model.relative_entropy(u, ur).unwrap();
            assert!(eq.abs() <= 1e-12, "{name}: midlocus residual {eq}");

            let d_sm = model.relative_flux(u, ur).unwrap() - model.relative_flux(u, ul).unwrap();
            assert!(d_sm < -1e-12, "{name}: d_sm = {d_sm} at ({ul}, {ur})");

            let jensen = testkit::gl_integrate(
                |v| model.ddentropy(v) * (model.flux(u) - model.flux(v)),
                ur,
                ul,
                4,
                24,
            );
            assert!(
                (d_sm - jensen).abs() <= 1e-9,
                "{name}: d_sm = {d_sm} vs Jensen form {jensen}"
            );
            assert!(jensen < 0.0, "{name}: Jensen form must be negative");
        }
    }
}

#[test]
fn shift_velocity_is_bounded_by_the_characteristic_speed() {
    for (name, model) in models() {
        let mut rng = testkit::rng(0x7a11);
        for _ in 0..2000 {
            let u = rng.random_range(-2.4..2.4);
            let (a, b) = separated_pair(&mut rng, 0.0);
            let (ul, ur) = (a.max(b), a.min(b));
            for eps in [0.0, 0.1] {
                let v = model.v_epsilon(u, ul, ur, eps).unwrap();
                assert!(
                    v.abs() <= model.dflux(u).abs() + 1e-9,
                    "{name}: |V_eps({u},{ul},{ur},{eps})| = {} > |A'| = {}",
                    v.abs(),
                    model.dflux(u).abs()
                );
            }
        }
    }
}

#[test]
fn liwas_l2_error_agrees_with_the_splitting_integrator() {
    let f = |x: f64| (3.0 * x).sin();
    let approx: LiwasFn<f64> = entroshift::liwas::build_liwas(&f, 2.0, 0.1).unwrap();
    // Independent L2 distance: split at every breakpoint of the
    // approximant, integrate the squared gap with the testkit integrator.
    let mut cuts = approx.breakpoints();
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let g = |x: f64| {
            let d = f(x) - approx.eval(x);
            d * d
        };
        total += testkit::split_integrate(&g, w[0] + 1e-13, w[1] - 1e-13, 1e-14);
    }
    let dist = total.max(0.0).sqrt();
    assert!(dist < 0.1, "independent L2 distance {dist} >= 0.1");
    let own = approx.l2_distance(&f, 64);
    assert!((dist - own).abs() < 1e-6, "library distance {own} vs oracle {dist}");
}

#[test]
fn mollified_shift_converges_to_the_event_driven_path() {
    let model = Arc::new(FluxEntropyModel::burgers(2.0).unwrap());
    let u = FrontSolution::evolve(model.clone(), &[1.0, -1.0], &[0.0], 1.0, 0.01).unwrap();
    let ub1 = entroshift::ClassicalSolution::constant(model.clone(), 1.0).unwrap();
    let ub2 = entroshift::ClassicalSolution::constant(model.clone(), -1.0).unwrap();
    let exact = entroshift::shift::build_shift(&u, &ub1, &ub2, 0.0, -0.25, 0.0, 1.0).unwrap();
    let mut sups = Vec::new();
    for n in [10usize, 100, 1000] {
        let moll =
            entroshift::shift::mollified_shift(&u, &ub1, &ub2, 0.0, -0.25, 0.0, 1.0, n).unwrap();
        let mut sup: f64 = 0.0;
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            sup = sup.max((moll.eval(t).unwrap() - exact.eval(t).unwrap()).abs());
        }
        sups.push(sup);
    }
    // The mollified velocity smears the front over a 1/n neighborhood, so
    // the gap shrinks like 1/n.
    assert!(sups[2] < 1e-2, "n = 1000 gap {} >= 1e-2", sups[2]);
    assert!(sups[2] <= sups[0] + 1e-12, "no improvement from n=10 to n=1000: {sups:?}");
}

/// The datum-sampling helper keeps the constructed profile within the
/// sampled function's bounds, so the front solution never exceeds B.
#[test]
fn front_states_respect_the_declared_bound() {
    let model = Arc::new(FluxEntropyModel::burgers(2.0).unwrap());
    let states: [f64; 4] = [1.5, -0.5, 0.5, -1.5];
    let sol = FrontSolution::evolve(model, &states, &[-1.0, 0.0, 1.0], 2.0, 0.05).unwrap();
    for slab in sol.slabs() {
        for f in &slab.fronts {
            assert!(f.left.abs() <= 1.5 + 1e-12 && f.right.abs() <= 1.5 + 1e-12);
        }
    }
    let m = MonotoneLipschitzFn::from_fn(|x: f64| x.tanh(), -2.0, 2.0, 64).unwrap();
    assert!(m.max_value() <= 2.0f64.tanh() + 1e-12);
}
