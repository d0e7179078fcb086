//! Convergence and comparison checks for the characteristics solver: the
//! PDE residual shrinks at second order in the probe spacing, the
//! one-sided Oleinik bound holds with the convexity constant, and ordered
//! data stay ordered.

use std::sync::Arc;

use entroshift::{ClassicalSolution, FluxEntropyModel, MonotoneLipschitzFn, SampleGrid};
use rand::Rng;

/// Smooth monotone datum sampled finely enough that the interpolation
/// error (quadratic in the sample spacing) sits far below the finite
/// difference residuals under test.
fn tanh_solution() -> ClassicalSolution<f64> {
    let model = Arc::new(FluxEntropyModel::burgers(1.0).unwrap());
    let datum = MonotoneLipschitzFn::from_fn(|x: f64| 0.8 * x.tanh(), -6.0, 6.0, 600_000).unwrap();
    ClassicalSolution::new(model, datum).unwrap()
}

#[test]
fn pde_residual_is_second_order_in_the_probe_spacing() {
    let sol = tanh_solution();
    let model = sol.model().clone();
    let probe_xs: Vec<f64> = (0..25).map(|i| -1.8 + 0.15 * i as f64).collect();
    let probe_ts = [0.4, 0.8];
    let mut maxima = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let mut worst: f64 = 0.0;
        for &x in &probe_xs {
            for &t in &probe_ts {
                let vt = (sol.evaluate(x, t + h).unwrap() - sol.evaluate(x, t - h).unwrap())
                    / (2.0 * h);
                let ax = (model.flux(sol.evaluate(x + h, t).unwrap())
                    - model.flux(sol.evaluate(x - h, t).unwrap()))
                    / (2.0 * h);
                worst = worst.max((vt + ax).abs());
            }
        }
        maxima.push(worst);
    }
    let order = (maxima[0] / maxima[2]).log2() / 2.0;
    assert!(
        order >= 1.8,
        "observed order {order:.3} < 1.8; residual maxima {maxima:?}"
    );
    // And the residual is genuinely small at the finest level.
    assert!(maxima[2] < 1e-3, "residual {} too large", maxima[2]);
}

#[test]
fn oleinik_modulus_respects_the_convexity_bound() {
    let grid = SampleGrid::new(-3.0, 3.0, 120).unwrap();
    for model in [
        Arc::new(FluxEntropyModel::burgers(1.5).unwrap()),
        Arc::new(FluxEntropyModel::quartic_cosh(1.5).unwrap()),
    ] {
        let consts = model.derive_constants(1.0).unwrap();
        let datum = MonotoneLipschitzFn::new(vec![(-1.0, -1.0), (1.0, 1.0)]).unwrap();
        let sol = ClassicalSolution::new(model.clone(), datum).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let modulus = sol.oleinik_modulus(t, &grid).unwrap();
            assert!(
                modulus <= 1.0 / consts.inf_a2 + 1e-6,
                "modulus {modulus} at t = {t} above 1/inf A'' = {}",
                1.0 / consts.inf_a2
            );
        }
    }
    // Reference value: the clamp datum under Burgers flattens to slope
    // 1/(1+t), so the modulus at t = 1 is exactly 1/2.
    let model = Arc::new(FluxEntropyModel::<f64>::burgers(1.5).unwrap());
    let datum = MonotoneLipschitzFn::new(vec![(-1.0, -1.0), (1.0, 1.0)]).unwrap();
    let sol = ClassicalSolution::new(model, datum).unwrap();
    let m1: f64 = sol.oleinik_modulus(1.0, &grid).unwrap();
    assert!((m1 - 0.5).abs() <= 1e-6, "clamp modulus at t=1 is {m1}, want 1/2");
}

#[test]
fn comparison_principle_holds_on_ordered_pairs() {
    let model = Arc::new(FluxEntropyModel::burgers(2.0).unwrap());
    let grid = SampleGrid::new(-4.0, 4.0, 80).unwrap();
    let mut rng = entroshift_testkit::rng(0xc0de);
    for case in 0..10 {
        // Two random nondecreasing clamp profiles; their pointwise max and
        // min are ordered nondecreasing data.
        let amp: [f64; 2] = [rng.random_range(0.3..1.4), rng.random_range(0.3..1.4)];
        let center: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let width: [f64; 2] = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
        let clamp = move |k: usize, x: f64| amp[k] * ((x - center[k]) / width[k]).clamp(-1.0, 1.0);
        let upper = MonotoneLipschitzFn::from_fn(|x| clamp(0, x).max(clamp(1, x)), -3.0, 3.0, 96)
            .unwrap();
        let lower = MonotoneLipschitzFn::from_fn(|x| clamp(0, x).min(clamp(1, x)), -3.0, 3.0, 96)
            .unwrap();
        let hi = ClassicalSolution::new(model.clone(), upper).unwrap();
        let lo = ClassicalSolution::new(model.clone(), lower).unwrap();
        for t in [0.5, 1.5] {
            assert!(
                hi.comparison_check(&lo, &grid, t, 1e-9).unwrap(),
                "comparison failed in case {case} at t = {t}"
            );
        }
    }
}

#[test]
fn constant_extension_matches_the_datum_far_field() {
    let sol = tanh_solution();
    // Far from the data variation the solution rides the constant states.
    for t in [0.0, 0.5, 1.0] {
        assert!((sol.evaluate(-9.0, t).unwrap() - 0.8 * (-6.0f64).tanh()).abs() < 1e-9);
        assert!((sol.evaluate(9.0, t).unwrap() - 0.8 * (6.0f64).tanh()).abs() < 1e-9);
    }
}
