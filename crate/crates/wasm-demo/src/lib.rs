//! Browser bindings for the demo page in `www/`. Every export returns a JSON
//! string; the plain functions below them are what the native tests call.

use dsqc_core::channel::{expected_detection_rate, transmit, Adversary, BasisPolicy, ChannelModel};
use dsqc_core::harness::{preset, run_scenario, ScenarioConfig, PRESET_NAMES};
use dsqc_core::metrics::{entangled_per_dit, von_neumann_entropy, QubitAccounting};
use dsqc_core::qudit::MAX_DIM;
use dsqc_core::sources::{make_decoy, AmplitudeProfile, PreparationKind, Register};
use dsqc_core::SimRng;
use rand::SeedableRng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest trial count the page may request in one call.
pub const MAX_DEMO_TRIALS: usize = 200;

/// Profiles with one dominant amplitude `p_max` and the rest spread evenly,
/// from maximal entanglement up to `p_max = 0.999`.
pub fn efficiency_points(d: usize, points: usize) -> Result<Value, String> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(format!("d = {d} outside 2..={MAX_DIM}"));
    }
    let points = points.clamp(2, 500);
    let lo = 1.0 / d as f64;
    let hi = 0.999;
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let p_max = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let rest = (1.0 - p_max) / (d - 1) as f64;
        let mut p = vec![rest; d];
        p[0] = p_max;
        let profile = AmplitudeProfile::from_probabilities(&p).map_err(|e| e.to_string())?;
        let eta = |acc| {
            entangled_per_dit(&profile, acc)
                .total()
                .map_err(|e| e.to_string())
        };
        out.push(json!({
            "p_max": p_max,
            "entropy": von_neumann_entropy(&profile),
            "eta_t": eta(QubitAccounting::Entropy)?,
            "eta_t_photon_count": eta(QubitAccounting::PhotonCount)?,
        }));
    }
    Ok(json!({ "d": d, "points": out }))
}

fn parse_policy(s: &str) -> Result<BasisPolicy, String> {
    match s {
        "random-zx" => Ok(BasisPolicy::RandomZx),
        "fixed-z" => Ok(BasisPolicy::FixedZ),
        "fixed-x" => Ok(BasisPolicy::FixedX),
        _ => Err(format!("unknown policy {s:?}")),
    }
}

/// Simulated and analytic decoy error rates for every `d`.
pub fn detection_points(policy: &str, decoys: usize, seed: u64) -> Result<Value, String> {
    let policy = parse_policy(policy)?;
    let decoys = decoys.clamp(1, 100_000);
    let adversary = Adversary::InterceptResend { policy };
    let mut rng = SimRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for d in 2..=MAX_DIM {
        let mut errors = 0usize;
        for _ in 0..decoys {
            let (s, rec) = make_decoy(d, &mut rng).map_err(|e| e.to_string())?;
            let PreparationKind::Decoy { basis, index } = rec.kind else {
                unreachable!("make_decoy records a decoy")
            };
            let mut reg = Register::new();
            let slot = reg.add_single(s);
            transmit(&mut reg, slot, &ChannelModel::ideal(), &adversary, &mut rng)
                .map_err(|e| e.to_string())?;
            let got = reg
                .measure(&slot, basis, &mut rng)
                .map_err(|e| e.to_string())?;
            errors += usize::from(got.outcome != index);
        }
        out.push(json!({
            "d": d,
            "simulated": errors as f64 / decoys as f64,
            "expected": expected_detection_rate(d, policy),
        }));
    }
    Ok(json!({ "decoys_per_d": decoys, "points": out }))
}

/// Run a scenario given as TOML and return its aggregates.
pub fn scenario_aggregates(toml: &str) -> Result<Value, String> {
    let cfg = ScenarioConfig::from_toml(toml).map_err(|e| e.to_string())?;
    if cfg.trials > MAX_DEMO_TRIALS {
        return Err(format!(
            "{} trials requested; the page runs at most {MAX_DEMO_TRIALS}",
            cfg.trials
        ));
    }
    let outcome = run_scenario(&cfg).map_err(|e| e.to_string())?;
    serde_json::to_value(&outcome.summary.aggregates).map_err(|e| e.to_string())
}

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn efficiency_curve(d: usize, points: usize) -> Result<String, JsError> {
    to_js(efficiency_points(d, points))
}

#[wasm_bindgen]
pub fn detection_sweep(policy: &str, decoys: usize, seed: u32) -> Result<String, JsError> {
    to_js(detection_points(policy, decoys, u64::from(seed)))
}

#[wasm_bindgen]
pub fn run_scenario_toml(toml: &str) -> Result<String, JsError> {
    to_js(scenario_aggregates(toml))
}

#[wasm_bindgen]
pub fn preset_names() -> String {
    json!(PRESET_NAMES).to_string()
}

/// Preset as TOML with the trial count capped for the browser.
#[wasm_bindgen]
pub fn preset_toml(name: &str) -> Result<String, JsError> {
    let mut cfg = preset(name).ok_or_else(|| JsError::new(&format!("unknown preset {name:?}")))?;
    cfg.trials = cfg.trials.min(20);
    Ok(cfg.to_toml())
}
