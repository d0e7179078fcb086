//! Serializable result structures and CSV emitters. All numeric output
//! goes through the shortest round-trip float formatting, so identical
//! inputs produce byte-identical files.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use entroshift::pipeline::{MergeEvent, PsiResult};
use entroshift::{FrontSolution, LiwasFn, ShiftPath};
use serde::Serialize;

/// One nondecreasing Lipschitz piece: its breakpoints and values.
#[derive(Debug, Serialize)]
pub struct PieceJson {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Serialized form of a [`LiwasFn`]: jump list plus per-piece breakpoints.
#[derive(Debug, Serialize)]
pub struct LiwasJson {
    pub window: f64,
    pub jumps: Vec<f64>,
    pub pieces: Vec<PieceJson>,
}

impl LiwasJson {
    pub fn from_fn(f: &LiwasFn<f64>) -> Self {
        LiwasJson {
            window: f.window(),
            jumps: f.jumps().to_vec(),
            pieces: f
                .pieces()
                .iter()
                .map(|p| PieceJson { xs: p.xs().to_vec(), values: p.vs().to_vec() })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MergeJson {
    pub time: f64,
    /// Inclusive index blocks into the stage's boundary list (0 is the
    /// left cone).
    pub blocks: Vec<[usize; 2]>,
}

#[derive(Debug, Serialize)]
pub struct CertificateJson {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CertificateJson {
    /// `value <= bound` certificate.
    pub fn upper(name: &str, value: f64, bound: f64) -> Self {
        CertificateJson { name: name.into(), value, bound, pass: value <= bound }
    }
}

/// Structured summary written by `run` and `build-psi`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub scenario: Option<String>,
    pub horizon: f64,
    pub window: f64,
    pub eps: f64,
    pub delta: f64,
    pub boundaries: Vec<f64>,
    pub rel_entropy_total: f64,
    pub rel_entropy_per_cell: Vec<f64>,
    pub oleinik_modulus: f64,
    pub sup_norm: f64,
    pub fit_target: f64,
    pub shift_eps: f64,
    pub cone_speed: f64,
    pub merge_log: Vec<MergeJson>,
    pub certificates: Vec<CertificateJson>,
    pub diagnostics: Vec<String>,
    pub psi: LiwasJson,
}

pub fn merge_json(log: &[MergeEvent<f64>]) -> Vec<MergeJson> {
    log.iter()
        .map(|e| MergeJson {
            time: e.time,
            blocks: e.pairs.iter().map(|&(a, b)| [a, b]).collect(),
        })
        .collect()
}

/// Per-cell integrals of `eta(u(., t) | psi)` over the final cells; the
/// integrand is piecewise smooth between front positions and psi
/// breakpoints, so the splitting integrator with those cuts is exact to
/// tolerance.
pub fn per_cell_entropy(
    u: &FrontSolution<f64>,
    psi: &PsiResult<f64>,
    t: f64,
) -> Result<Vec<f64>> {
    let model = u.model().clone();
    let mut cuts: Vec<f64> = psi.psi.breakpoints();
    for f in u.fronts_at(t)? {
        cuts.push(f.pos);
    }
    let mut out = Vec::new();
    for w in psi.boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            out.push(0.0);
            continue;
        }
        let mut edges = vec![a];
        for &c in &cuts {
            if c > a && c < b {
                edges.push(c);
            }
        }
        edges.push(b);
        edges.sort_by(|x, y| x.partial_cmp(y).expect("finite cuts"));
        let mut cell = 0.0;
        for e in edges.windows(2) {
            if e[1] - e[0] < 1e-13 {
                continue;
            }
            let g = |x: f64| {
                let ux = u.eval(x, t).expect("in-window evaluation");
                model.relative_entropy(ux, psi.psi.eval(x)).expect("bounded states")
            };
            cell += entroshift_testkit::split_integrate(
                &g,
                e[0] + 1e-13,
                e[1] - 1e-13,
                1e-12,
            );
        }
        out.push(cell.max(0.0));
    }
    Ok(out)
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    file.write_all(contents.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}

/// CSV of `x, u(x, t), psi(x)` profiles over `[-R, R]`.
pub fn write_profiles(
    path: &Path,
    u: &FrontSolution<f64>,
    psi: &LiwasFn<f64>,
    r: f64,
    t: f64,
    samples: usize,
) -> Result<()> {
    let mut text = String::from("x,u,psi\n");
    let n = samples.max(2);
    for i in 0..=n {
        let x = -r + 2.0 * r * i as f64 / n as f64;
        let ux = u.eval(x, t).map_err(|e| anyhow::anyhow!("profile sample: {e}"))?;
        text.push_str(&format!("{x},{ux},{}\n", psi.eval(x)));
    }
    write_atomic(path, &text)
}

/// CSV of front trajectories: one row per front endpoint per time slab,
/// `t, x, left, right`.
pub fn write_fronts(path: &Path, u: &FrontSolution<f64>) -> Result<()> {
    let mut text = String::from("t,x,left,right\n");
    for slab in u.slabs() {
        for f in &slab.fronts {
            text.push_str(&format!("{},{},{},{}\n", slab.t0, f.pos, f.left, f.right));
            text.push_str(&format!(
                "{},{},{},{}\n",
                slab.t1,
                f.pos_at(slab.t0, slab.t1),
                f.left,
                f.right
            ));
        }
    }
    write_atomic(path, &text)
}

/// CSV of a shift path with its sampled dissipation: `t, x, D`.
pub fn write_shift(path: &Path, p: &ShiftPath<f64>, d: &[(f64, f64, f64)]) -> Result<()> {
    let mut text = String::from("t,x,dissipation\n");
    let (t0, x0) = p.start();
    text.push_str(&format!("{t0},{x0},0\n"));
    for &(t, x, dd) in d {
        text.push_str(&format!("{t},{x},{dd}\n"));
    }
    write_atomic(path, &text)
}
