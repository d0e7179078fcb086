//! Scenario schema (versioned, `"schema": 1`) and its translation into
//! library objects. Parsing and validation failures map to exit code 2;
//! everything here returns `ScenarioError` for that purpose.

use std::path::Path;
use std::sync::Arc;

use entroshift::{FluxEntropyModel, FrontSolution, SmoothTriple};
use serde::Deserialize;

/// Any defect that makes the scenario unusable: unreadable file, bad
/// JSON, schema violations, or data outside the declared bounds.
#[derive(Debug)]
pub struct ScenarioError(pub String);

impl std::fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ScenarioError {}

fn bad(msg: impl Into<String>) -> ScenarioError {
    ScenarioError(msg.into())
}

/// Top-level scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Schema version; must be 1.
    pub schema: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSpec,
    pub initial_data: InitialData,
    /// Final time `T`.
    pub horizon: f64,
    /// Half-width `R` of the certification window.
    pub window: f64,
    /// Relative-entropy budget for the comparison function.
    pub eps: f64,
    /// Rarefaction discretization step; defaults to 1e-2 times the data
    /// range.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Seed for sampled reports; overridable by `--seed`.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub flux: CurveSpec,
    pub entropy: CurveSpec,
    pub state_bound: f64,
}

/// A named curve or explicit polynomial coefficients (constant term
/// first).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Named(String),
    Polynomial { polynomial: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    /// Piecewise-constant states, one more than `positions`.
    pub states: Vec<f64>,
    /// Strictly increasing jump positions.
    pub positions: Vec<f64>,
    /// Keep upward initial jumps as single non-entropic fronts.
    #[serde(default)]
    pub nonentropic: bool,
}

/// Maximum number of initial jumps per scenario.
pub const MAX_JUMPS: usize = 64;

pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let sc: Scenario = serde_json::from_str(&text)
        .map_err(|e| bad(format!("cannot parse {}: {e}", path.display())))?;
    validate(&sc)?;
    Ok(sc)
}

fn validate(sc: &Scenario) -> Result<(), ScenarioError> {
    if sc.schema != 1 {
        return Err(bad(format!("unsupported schema version {}", sc.schema)));
    }
    if !(sc.model.state_bound > 0.0) || !sc.model.state_bound.is_finite() {
        return Err(bad("state_bound must be positive and finite"));
    }
    if !(sc.horizon > 0.0) || !sc.horizon.is_finite() {
        return Err(bad("horizon must be positive and finite"));
    }
    if !(sc.window > 0.0) || !sc.window.is_finite() {
        return Err(bad("window must be positive and finite"));
    }
    if !(sc.eps > 0.0) || !sc.eps.is_finite() {
        return Err(bad("eps must be positive and finite"));
    }
    if let Some(d) = sc.delta {
        if !(d > 0.0) || !d.is_finite() {
            return Err(bad("delta must be positive and finite"));
        }
    }
    let data = &sc.initial_data;
    if data.states.len() != data.positions.len() + 1 {
        return Err(bad(format!(
            "need one more state than positions, got {} states and {} positions",
            data.states.len(),
            data.positions.len()
        )));
    }
    if data.positions.len() > MAX_JUMPS {
        return Err(bad(format!(
            "at most {MAX_JUMPS} initial jumps are supported, got {}",
            data.positions.len()
        )));
    }
    for w in data.positions.windows(2) {
        if !(w[1] > w[0]) {
            return Err(bad("positions must be strictly increasing"));
        }
    }
    for &p in &data.positions {
        if !p.is_finite() {
            return Err(bad("positions must be finite"));
        }
    }
    for &s in &data.states {
        if !s.is_finite() || s.abs() > sc.model.state_bound {
            return Err(bad(format!(
                "state {s} lies outside the declared bound {}",
                sc.model.state_bound
            )));
        }
    }
    Ok(())
}

fn curve(spec: &CurveSpec, kind: &str) -> Result<SmoothTriple<f64>, ScenarioError> {
    match spec {
        CurveSpec::Named(name) => match (kind, name.as_str()) {
            ("flux", "burgers") => Ok(SmoothTriple::burgers_flux()),
            ("flux", "quartic") => Ok(SmoothTriple::quartic_flux()),
            ("entropy", "square") => Ok(SmoothTriple::square_entropy()),
            ("entropy", "exp-cosh") => Ok(SmoothTriple::cosh_entropy()),
            _ => Err(bad(format!("unknown {kind} \"{name}\""))),
        },
        CurveSpec::Polynomial { polynomial } => {
            if polynomial.is_empty() || polynomial.iter().any(|c| !c.is_finite()) {
                return Err(bad(format!("{kind} polynomial must be nonempty and finite")));
            }
            Ok(SmoothTriple::polynomial(polynomial))
        }
    }
}

/// Builds the flux/entropy model, honoring `ENTROSHIFT_QUAD_TOL`.
pub fn build_model(spec: &ModelSpec) -> Result<Arc<FluxEntropyModel<f64>>, ScenarioError> {
    let flux = curve(&spec.flux, "flux")?;
    let entropy = curve(&spec.entropy, "entropy")?;
    let mut model = FluxEntropyModel::new(flux, entropy, spec.state_bound)
        .map_err(|e| bad(format!("model rejected: {e}")))?;
    if let Ok(text) = std::env::var("ENTROSHIFT_QUAD_TOL") {
        let tol: f64 = text
            .parse()
            .map_err(|_| bad(format!("ENTROSHIFT_QUAD_TOL is not a number: {text:?}")))?;
        model
            .set_quad_tol(tol)
            .map_err(|e| bad(format!("ENTROSHIFT_QUAD_TOL rejected: {e}")))?;
    }
    Ok(Arc::new(model))
}

/// Rarefaction step: configured value or 1e-2 times the data range.
pub fn rarefaction_delta(sc: &Scenario) -> f64 {
    if let Some(d) = sc.delta {
        return d;
    }
    let lo = sc.initial_data.states.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = sc.initial_data.states.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(1e-3);
    1e-2 * range
}

/// Runs front tracking on the scenario data. Failures here are runtime
/// (resolution) problems, not parse errors.
pub fn evolve(
    sc: &Scenario,
    model: &Arc<FluxEntropyModel<f64>>,
) -> anyhow::Result<FrontSolution<f64>> {
    let delta = rarefaction_delta(sc);
    let data = &sc.initial_data;
    let run = if data.nonentropic {
        FrontSolution::evolve_nonentropic(
            model.clone(),
            &data.states,
            &data.positions,
            sc.horizon,
            delta,
        )
    } else {
        FrontSolution::evolve(model.clone(), &data.states, &data.positions, sc.horizon, delta)
    };
    Ok(run?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> String {
        r#"{
            "schema": 1,
            "model": {"flux": "burgers", "entropy": "square", "state_bound": 2.0},
            "initial_data": {"states": [1.0, -1.0], "positions": [0.0]},
            "horizon": 1.0, "window": 2.0, "eps": 0.01
        }"#
        .to_string()
    }

    fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let sc: Scenario =
            serde_json::from_str(text).map_err(|e| bad(format!("cannot parse: {e}")))?;
        validate(&sc)?;
        Ok(sc)
    }

    #[test]
    fn accepts_the_baseline_scenario() {
        let sc = parse(&base()).unwrap();
        assert_eq!(sc.schema, 1);
        assert!(!sc.initial_data.nonentropic);
        assert!((rarefaction_delta(&sc) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn explicit_delta_wins_over_the_default() {
        let text = base().replace("\"eps\": 0.01", "\"eps\": 0.01, \"delta\": 0.005");
        let sc = parse(&text).unwrap();
        assert_eq!(rarefaction_delta(&sc), 0.005);
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = base().replace("\"schema\": 1,", "\"schema\": 1, \"typo\": 3,");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_other_schema_versions() {
        let text = base().replace("\"schema\": 1", "\"schema\": 3");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_mismatched_states_and_positions() {
        let text = base().replace("[0.0]", "[0.0, 1.0]");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_disordered_positions() {
        let text = base()
            .replace("[1.0, -1.0]", "[1.0, 0.0, -1.0]")
            .replace("\"positions\": [0.0]", "\"positions\": [0.5, 0.5]");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_states_beyond_the_bound() {
        let text = base().replace("[1.0, -1.0]", "[3.0, -1.0]");
        assert!(parse(&text).is_err());
    }

    #[test]
    fn rejects_too_many_jumps() {
        let states: Vec<String> = (0..=65).map(|i| format!("{}", (i % 2) as f64)).collect();
        let positions: Vec<String> = (0..65).map(|i| format!("{}.0", i)).collect();
        let text = base()
            .replace("[1.0, -1.0]", &format!("[{}]", states.join(", ")))
            .replace("\"positions\": [0.0]", &format!("\"positions\": [{}]", positions.join(", ")));
        assert!(parse(&text).is_err());
    }

    #[test]
    fn polynomial_curves_build_a_model() {
        let text = base().replace(
            "\"flux\": \"burgers\"",
            "\"flux\": {\"polynomial\": [0.0, 0.0, 0.5]}",
        );
        let sc = parse(&text).unwrap();
        let model = build_model(&sc.model).unwrap();
        assert!((model.flux(2.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn concave_flux_is_rejected_when_building() {
        let text = base().replace(
            "\"flux\": \"burgers\"",
            "\"flux\": {\"polynomial\": [0.0, 0.0, -0.5]}",
        );
        let sc = parse(&text).unwrap();
        assert!(build_model(&sc.model).is_err());
    }

    #[test]
    fn rejects_nonpositive_budget_and_times() {
        for (from, to) in [
            ("\"eps\": 0.01", "\"eps\": 0.0"),
            ("\"horizon\": 1.0", "\"horizon\": -1.0"),
            ("\"window\": 2.0", "\"window\": 0.0"),
        ] {
            let text = base().replace(from, to);
            assert!(parse(&text).is_err(), "{to} should be rejected");
        }
    }
}
