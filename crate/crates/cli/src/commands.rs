//! Subcommand implementations. Each returns the process exit code:
//! 0 when every certificate passes, 1 on certificate failure; scenario
//! errors bubble up as [`ScenarioError`] and exit 2.

use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use entroshift::front_tracking::fan_dissipation_bound;
use entroshift::pipeline::{build_psi, certify_monotone_decay};
use entroshift::shift::{build_shift, dissipation_along, mollified_shift, speed_sup};
use entroshift::{ClassicalSolution, FluxEntropyModel, FrontSolution, TentTestFn};
use rand::Rng;

use crate::report::{self, CertificateJson, LiwasJson, RunReport};
use crate::scenario::{self, Scenario};

/// Numerical slack accepted on the relative-entropy and condition-E
/// certificates.
const NUM_TOL: f64 = 1e-6;

fn load(path: &Path) -> Result<(Scenario, Arc<FluxEntropyModel<f64>>)> {
    let sc = scenario::load(path)?;
    let model = scenario::build_model(&sc.model)?;
    Ok((sc, model))
}

/// Grid upper bound for `A''` on the working interval.
fn sup_ddflux(model: &FluxEntropyModel<f64>) -> f64 {
    let (lo, hi) = model.working_interval();
    let n = 512;
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let u = lo + (hi - lo) * i as f64 / n as f64;
        sup = sup.max(model.ddflux(u));
    }
    sup
}

/// Entropy production allowance for Kruzhkov residuals of a front
/// solution whose fans are discretized at step `delta`: every straddled
/// fan jump `(a, b)` produces at most `sup A'' delta^2 / 4`, one front
/// per initial fan, weighted by the test function's time mass.
fn kruzhkov_allowance(model: &FluxEntropyModel<f64>, sc: &Scenario, time_mass: f64) -> f64 {
    let delta = scenario::rarefaction_delta(sc);
    let n_up = sc
        .initial_data
        .states
        .windows(2)
        .filter(|w| w[1] > w[0])
        .count() as f64;
    n_up * sup_ddflux(model) * delta * delta / 4.0 * time_mass + 1e-9
}

struct Certificates {
    list: Vec<CertificateJson>,
    diagnostics: Vec<String>,
}

impl Certificates {
    fn new() -> Self {
        Certificates { list: Vec::new(), diagnostics: Vec::new() }
    }

    fn push(&mut self, c: CertificateJson) {
        println!(
            "certificate {:<28} value {:>13.6e}  bound {:>13.6e}  {}",
            c.name,
            c.value,
            c.bound,
            if c.pass { "pass" } else { "FAIL" }
        );
        self.list.push(c);
    }

    fn diagnose(&mut self, msg: String) {
        println!("diagnostic: {msg}");
        self.diagnostics.push(msg);
    }
}

/// Front-admissibility, Kruzhkov, and decay certificates shared by `run`.
fn solution_certificates(
    sc: &Scenario,
    model: &Arc<FluxEntropyModel<f64>>,
    u: &FrontSolution<f64>,
    certs: &mut Certificates,
) -> Result<()> {
    // Per-front dissipation against the fan bound.
    let delta = scenario::rarefaction_delta(sc);
    let worst = u.max_front_dissipation()?;
    let fan = fan_dissipation_bound(model.as_ref(), delta);
    certs.push(CertificateJson::upper("front-admissibility", worst, fan));
    if worst > fan {
        // Identify the offending jump for the diagnostic.
        if let Some(slab) = u.slabs().first() {
            for f in &slab.fronts {
                if f.left < f.right {
                    let lam = model.shock_dissipation(f.left, f.right)?;
                    if lam >= worst - 1e-12 {
                        certs.diagnose(format!(
                            "non-entropic front ({}, {}) with Lambda = {lam} > 0",
                            f.left, f.right
                        ));
                    }
                }
            }
        }
    }

    // Kruzhkov spot checks with a tent spanning the data.
    let span_lo = sc.initial_data.positions.first().copied().unwrap_or(0.0) - 1.0;
    let span_hi = sc.initial_data.positions.last().copied().unwrap_or(0.0) + 1.0;
    let reach = speed_sup(model.as_ref()) * sc.horizon;
    let tent = TentTestFn::new(
        span_lo - reach,
        0.5 * (span_lo + span_hi),
        span_hi + reach,
        0.0,
        0.5 * sc.horizon,
        sc.horizon,
    )?;
    let allowance = kruzhkov_allowance(model, sc, 0.5 * sc.horizon);
    let scale = sc
        .initial_data
        .states
        .iter()
        .fold(0.0f64, |m, s| m.max(s.abs()));
    for k in [-0.3 * scale, 0.0, 0.3 * scale] {
        let r = u.kruzhkov_residual(k, &tent)?;
        certs.push(CertificateJson::upper(
            &format!("kruzhkov-residual(k={k})"),
            -r,
            allowance,
        ));
    }

    // Monotone decay of relative entropy against the mid-state over a
    // shrinking window.
    let smin = sc.initial_data.states.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sc.initial_data.states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ubar = ClassicalSolution::constant(model.clone(), 0.5 * (smin + smax))?;
    let w = speed_sup(model.as_ref());
    let half = sc.window.max(span_hi - span_lo);
    let t_max = sc.horizon.min(0.8 * half / w);
    if t_max > 1e-6 {
        let times: Vec<f64> = (0..=16).map(|i| t_max * i as f64 / 16.0).collect();
        let decay = certify_monotone_decay(
            model.as_ref(),
            u,
            &ubar,
            (-half, half),
            &times,
            w,
            1e-9,
        )?;
        let worst_rise = decay
            .violations
            .iter()
            .map(|&k| decay.corrected[k + 1] - decay.corrected[k])
            .fold(0.0f64, f64::max);
        certs.push(CertificateJson::upper("entropy-decay", worst_rise, 1e-9));
        if decay.flagged {
            certs.diagnose(format!(
                "relative entropy rises along the shrinking window ({} violations)",
                decay.violations.len()
            ));
        }
    }
    Ok(())
}

pub fn cmd_run(path: &Path, out: &Path, eps_override: Option<f64>) -> Result<i32> {
    let (mut sc, model) = load(path)?;
    if let Some(eps) = eps_override {
        sc.eps = eps;
    }
    if let Some(name) = &sc.name {
        println!("scenario: {name}");
    }
    let u = scenario::evolve(&sc, &model)?;
    let mut certs = Certificates::new();
    solution_certificates(&sc, &model, &u, &mut certs)?;

    // The comparison function and its three conclusions.
    let psi = build_psi(&model, &u, sc.horizon, sc.window, sc.eps)?;
    let consts = model.derive_constants(1.0)?;
    certs.push(CertificateJson::upper(
        "rel-entropy-total",
        psi.rel_entropy_total,
        sc.eps + NUM_TOL,
    ));
    certs.push(CertificateJson::upper(
        "condition-e-modulus",
        psi.oleinik_modulus,
        (1.0 / consts.inf_a2) * (1.0 + NUM_TOL),
    ));
    let u_sup = sc
        .initial_data
        .states
        .iter()
        .fold(0.0f64, |m, s| m.max(s.abs()));
    certs.push(CertificateJson::upper("psi-sup-norm", psi.sup_norm, u_sup + 1e-12));

    // A demonstration shift between the extreme constant states, with its
    // dissipation certificate.
    let smin = sc.initial_data.states.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sc.initial_data.states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ub1 = ClassicalSolution::constant(model.clone(), smax)?;
    let ub2 = ClassicalSolution::constant(model.clone(), smin)?;
    let demo = build_shift(&u, &ub1, &ub2, 0.0, 0.0, sc.eps, sc.horizon)?;
    let d = dissipation_along(&u, &ub1, &ub2, &demo)?;
    let dmax = d.iter().fold(f64::NEG_INFINITY, |m, &(_, _, v)| m.max(v));
    certs.push(CertificateJson::upper("shift-lipschitz", demo.max_difference_slope(),
        speed_sup(model.as_ref()) + 1e-9));
    certs.push(CertificateJson::upper("shift-dissipation", dmax, sc.eps + 1e-9));

    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let per_cell = report::per_cell_entropy(&u, &psi, sc.horizon)?;
    let rep = RunReport {
        scenario: sc.name.clone(),
        horizon: sc.horizon,
        window: sc.window,
        eps: sc.eps,
        delta: scenario::rarefaction_delta(&sc),
        boundaries: psi.boundaries.clone(),
        rel_entropy_total: psi.rel_entropy_total,
        rel_entropy_per_cell: per_cell,
        oleinik_modulus: psi.oleinik_modulus,
        sup_norm: psi.sup_norm,
        fit_target: psi.fit_target,
        shift_eps: psi.shift_eps,
        cone_speed: psi.cone_speed,
        merge_log: report::merge_json(&psi.merge_log),
        certificates: certs.list,
        diagnostics: certs.diagnostics,
        psi: LiwasJson::from_fn(&psi.psi),
    };
    report::write_json(&out.join("result.json"), &rep)?;
    report::write_profiles(&out.join("profiles.csv"), &u, &psi.psi, sc.window, sc.horizon, 800)?;
    report::write_fronts(&out.join("fronts.csv"), &u)?;
    report::write_shift(&out.join("shift.csv"), &demo, &d)?;

    let pass = rep.certificates.iter().all(|c| c.pass);
    println!(
        "RESULT: {} ({}/{} certificates)",
        if pass { "PASS" } else { "FAIL" },
        rep.certificates.iter().filter(|c| c.pass).count(),
        rep.certificates.len()
    );
    Ok(if pass { 0 } else { 1 })
}

pub fn cmd_build_psi(path: &Path, out: &Path, eps_override: Option<f64>) -> Result<i32> {
    let (mut sc, model) = load(path)?;
    if let Some(eps) = eps_override {
        sc.eps = eps;
    }
    let u = scenario::evolve(&sc, &model)?;
    let psi = build_psi(&model, &u, sc.horizon, sc.window, sc.eps)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let per_cell = report::per_cell_entropy(&u, &psi, sc.horizon)?;
    let rep = RunReport {
        scenario: sc.name.clone(),
        horizon: sc.horizon,
        window: sc.window,
        eps: sc.eps,
        delta: scenario::rarefaction_delta(&sc),
        boundaries: psi.boundaries.clone(),
        rel_entropy_total: psi.rel_entropy_total,
        rel_entropy_per_cell: per_cell,
        oleinik_modulus: psi.oleinik_modulus,
        sup_norm: psi.sup_norm,
        fit_target: psi.fit_target,
        shift_eps: psi.shift_eps,
        cone_speed: psi.cone_speed,
        merge_log: report::merge_json(&psi.merge_log),
        certificates: Vec::new(),
        diagnostics: Vec::new(),
        psi: LiwasJson::from_fn(&psi.psi),
    };
    report::write_json(&out.join("psi.json"), &rep)?;
    report::write_profiles(&out.join("profiles.csv"), &u, &psi.psi, sc.window, sc.horizon, 800)?;
    println!(
        "psi built: {} boundaries, rel entropy {:.6e}, sup norm {:.6e}, {} merges",
        rep.boundaries.len(),
        rep.rel_entropy_total,
        rep.sup_norm,
        rep.merge_log.len()
    );
    Ok(0)
}

pub fn cmd_verify_condition_e(path: &Path, eps_override: Option<f64>) -> Result<i32> {
    let (mut sc, model) = load(path)?;
    if let Some(eps) = eps_override {
        sc.eps = eps;
    }
    let u = scenario::evolve(&sc, &model)?;
    let psi = build_psi(&model, &u, sc.horizon, sc.window, sc.eps)?;
    let consts = model.derive_constants(1.0)?;
    let bound = (1.0 / consts.inf_a2) * (1.0 + NUM_TOL);

    // Library modulus plus an independent sampled check of
    // psi(y) - psi(x) <= (c/T) (y - x).
    let n = 400;
    let mut sampled: f64 = 0.0;
    let r = sc.window;
    let vals: Vec<f64> = (0..=n)
        .map(|i| psi.psi.eval(-r + 2.0 * r * i as f64 / n as f64))
        .collect();
    for i in 0..n {
        for j in (i + 1)..=n {
            let dx = 2.0 * r * (j - i) as f64 / n as f64;
            sampled = sampled.max((vals[j] - vals[i]) * sc.horizon / dx);
        }
    }
    let modulus = psi.oleinik_modulus.max(sampled);
    println!(
        "condition E: modulus {modulus:.9e} (library {:.9e}, sampled {sampled:.9e}) bound {bound:.9e}",
        psi.oleinik_modulus
    );
    let pass = modulus <= bound;
    println!("RESULT: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

pub fn cmd_export_fronts(path: &Path, out: &Path) -> Result<i32> {
    let (sc, model) = load(path)?;
    let u = scenario::evolve(&sc, &model)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))?;
    let file = out.join("fronts.csv");
    report::write_fronts(&file, &u)?;
    println!(
        "exported {} slabs, {} events to {}",
        u.slabs().len(),
        u.events().len(),
        file.display()
    );
    Ok(0)
}

/// Drives the sampled lemma suites for the configured model and prints
/// per-lemma pass counts; deterministic for a fixed seed.
pub fn cmd_check_lemmas(path: Option<&Path>, samples: usize, seed: u64) -> Result<i32> {
    if samples == 0 {
        anyhow::bail!("--samples must be at least 1");
    }
    let (model, seed) = match path {
        Some(p) => {
            let (sc, model) = load(p)?;
            (model, sc.seed.map_or(seed, |s| if seed == 0 { s } else { seed }))
        }
        None => {
            let model = Arc::new(FluxEntropyModel::burgers(2.0)?);
            (model, seed)
        }
    };
    let b = model.state_bound();
    let box_hi = 0.8 * b;
    let mut rng = entroshift_testkit::rng(seed);
    let mut failures = 0usize;

    fn pair<R: Rng>(rng: &mut R, box_hi: f64, gap: f64) -> (f64, f64) {
        loop {
            let a: f64 = rng.random_range(-box_hi..box_hi);
            let b: f64 = rng.random_range(-box_hi..box_hi);
            if (a - b).abs() > gap {
                return (a, b);
            }
        }
    }

    // Entropic shocks: sign law and double-integral agreement.
    let mut pass = 0usize;
    for _ in 0..samples {
        let (a, c) = pair(&mut rng, box_hi, 1e-3);
        let lam = model.shock_dissipation(a, c)?;
        let oracle = entroshift_testkit::shock_dissipation_oracle(
            |u| model.dentropy(u),
            |u| model.dflux(u),
            a,
            c,
        );
        if (lam < 0.0) == (a > c) && (lam - oracle).abs() <= 1e-8 {
            pass += 1;
        }
    }
    println!("lemma entropic-shock-sign-law      : {pass}/{samples}");
    failures += samples - pass;

    // Shift velocity bound.
    let mut pass = 0usize;
    for _ in 0..samples {
        let u: f64 = rng.random_range(-box_hi..box_hi);
        let (x, y) = pair(&mut rng, box_hi, 0.0);
        let (ul, ur) = (x.max(y), x.min(y));
        let ok = [0.0, 0.1].iter().all(|&eps| {
            model
                .v_epsilon(u, ul, ur, eps)
                .map(|v| v.abs() <= model.dflux(u).abs() + 1e-9)
                .unwrap_or(false)
        });
        if ok {
            pass += 1;
        }
    }
    println!("lemma shift-velocity-bound         : {pass}/{samples}");
    failures += samples - pass;

    // Shock-riding dissipation on random quadruples.
    let mut pass = 0usize;
    for _ in 0..samples {
        let (x, y) = pair(&mut rng, box_hi, 1e-3);
        let (um, up) = (x.max(y), x.min(y));
        let (x2, y2) = pair(&mut rng, box_hi, 0.0);
        let (ul, ur) = (x2.max(y2), x2.min(y2));
        let sigma = model.rh_speed(um, up)?;
        let d = model.relative_flux(up, ur)? - model.relative_flux(um, ul)?
            - sigma * (model.relative_entropy(up, ur)? - model.relative_entropy(um, ul)?);
        if d <= 1e-9 {
            pass += 1;
        }
    }
    println!("lemma shock-riding-dissipation     : {pass}/{samples}");
    failures += samples - pass;

    // Midlocus strict decrease with the Jensen cross-check.
    let n_mid = (samples / 10).max(1);
    let mut pass = 0usize;
    for _ in 0..n_mid {
        let (x, y) = pair(&mut rng, box_hi, 1e-2);
        let (ul, ur) = (x.max(y), x.min(y));
        let mut lo = ur;
        let mut hi = ul;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let g = model.relative_entropy(mid, ul)? - model.relative_entropy(mid, ur)?;
            if g > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        let d_sm = model.relative_flux(u, ur)? - model.relative_flux(u, ul)?;
        let jensen = entroshift_testkit::gl_integrate(
            |v| model.ddentropy(v) * (model.flux(u) - model.flux(v)),
            ur,
            ul,
            4,
            24,
        );
        if d_sm < -1e-12 && (d_sm - jensen).abs() <= 1e-9 {
            pass += 1;
        }
    }
    println!("lemma midlocus-strict-decrease     : {pass}/{n_mid}");
    failures += n_mid - pass;

    // Quadratic comparability of the relative entropy.
    let consts = model.derive_constants(1.0)?;
    let mut pass = 0usize;
    for _ in 0..samples {
        let (a, c) = pair(&mut rng, box_hi, 0.0);
        let eta = model.relative_entropy(a, c)?;
        let gap = (a - c) * (a - c);
        if eta >= consts.c_star * gap - 1e-12 && eta <= consts.c_dstar * gap + 1e-12 {
            pass += 1;
        }
    }
    println!("lemma quadratic-comparability      : {pass}/{samples}");
    failures += samples - pass;

    // Mollified-velocity cross-check on the standing shock.
    let a = 0.5 * b;
    let u = FrontSolution::evolve(model.clone(), &[a, -a], &[0.0], 1.0, 0.01 * a)?;
    let ub1 = ClassicalSolution::constant(model.clone(), a)?;
    let ub2 = ClassicalSolution::constant(model.clone(), -a)?;
    let exact = build_shift(&u, &ub1, &ub2, 0.0, -0.25 * a, 0.0, 1.0)?;
    let mut sups = Vec::new();
    for n in [10usize, 100, 1000] {
        let moll = mollified_shift(&u, &ub1, &ub2, 0.0, -0.25 * a, 0.0, 1.0, n)?;
        let mut sup: f64 = 0.0;
        for k in 0..=200 {
            let t = k as f64 / 200.0;
            sup = sup.max((moll.eval(t)? - exact.eval(t)?).abs());
        }
        sups.push(sup);
        println!("  mollified integrator n = {n:<4}: sup gap {sup:.6e}");
    }
    let bound = 1e-2 * consts.sup_abs_a1.max(1.0);
    let ok = sups[2] <= bound && sups[2] <= sups[0] + 1e-12;
    println!(
        "lemma mollified-shift-agreement    : {}/1 (n=1000 gap {:.3e}, bound {bound:.3e})",
        ok as usize, sups[2]
    );
    failures += !ok as usize;

    println!(
        "RESULT: {}",
        if failures == 0 { "PASS" } else { "FAIL" }
    );
    Ok(if failures == 0 { 0 } else { 1 })
}
