//! WebAssembly bindings for the browser demo.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold the
//! logic and are usable natively; the exported wrappers only convert errors.

use contagion::batch::outbreak_map;
use contagion::engine::{run, RoundRecord, RunSummary, Simulation};
use contagion::io::{parse_config, preset_names};
use contagion::model::HealthState;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Trajectory {
    records: Vec<RoundRecord>,
    summary: RunSummary,
}

/// Full run; the first record is the state before round 1.
pub fn simulate_json(config: &str) -> Result<String, String> {
    let config = parse_config(config).map_err(|e| e.to_string())?;
    let result = run(config).map_err(|e| e.to_string())?;
    let mut records = vec![result.initial];
    records.extend(result.records);
    let out = Trajectory {
        records,
        summary: result.summary,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Snapshot {
    round: u32,
    terminated: bool,
    /// Contact pairs `[i, j]` with `i < j`, before quarantine or deaths.
    edges: Vec<[usize; 2]>,
    /// One letter per individual: S, I, R or D.
    states: String,
    quarantined: Vec<bool>,
    exposure: Vec<f64>,
}

fn letter(s: HealthState) -> char {
    match s {
        HealthState::Susceptible => 'S',
        HealthState::Infected => 'I',
        HealthState::Recovered => 'R',
        HealthState::Dead => 'D',
    }
}

/// Network and individual states after `rounds` rounds (or at extinction).
pub fn snapshot_json(config: &str, rounds: u32) -> Result<String, String> {
    let config = parse_config(config).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(config).map_err(|e| e.to_string())?;
    while sim.round() < rounds && !sim.is_terminated() {
        sim.step().map_err(|e| e.to_string())?;
    }
    let contacts = sim.contacts();
    let n = contacts.order();
    let edges = (0..n)
        .flat_map(|i| {
            contacts
                .contacts(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, _)| [i, j])
        })
        .collect();
    let ledger = sim.ledger();
    let out = Snapshot {
        round: sim.round(),
        terminated: sim.is_terminated(),
        edges,
        states: ledger.states().iter().map(|&s| letter(s)).collect(),
        quarantined: (0..n).map(|i| ledger.is_quarantined(i)).collect(),
        exposure: sim.exposure().to_vec(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapRequest {
    thresholds: Vec<f64>,
    contacts: Vec<f64>,
    replicates: usize,
}

#[derive(Serialize)]
struct MapResponse {
    thresholds: Vec<f64>,
    contacts: Vec<f64>,
    fractions: Vec<Vec<f64>>,
}

/// Outbreak fractions over a pathogenic threshold × mean contacts grid.
/// `request` is `{"thresholds": [...], "contacts": [...], "replicates": n}`.
pub fn outbreak_map_json(config: &str, request: &str) -> Result<String, String> {
    let config = parse_config(config).map_err(|e| e.to_string())?;
    let req: MapRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    if req.replicates == 0 {
        return Err("replicates must be at least 1".into());
    }
    let seed = config.master_seed;
    let map = outbreak_map(
        &req.thresholds,
        &req.contacts,
        &config,
        req.replicates,
        seed,
        1,
    )
    .map_err(|e| e.to_string())?;
    let out = MapResponse {
        thresholds: map.thresholds,
        contacts: map.contacts,
        fractions: map.fractions,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn presets_json() -> String {
    serde_json::to_string(preset_names()).expect("names serialize")
}

#[wasm_bindgen]
pub fn simulate(config: &str) -> Result<String, JsError> {
    simulate_json(config).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn snapshot(config: &str, rounds: u32) -> Result<String, JsError> {
    snapshot_json(config, rounds).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = outbreakMap)]
pub fn outbreak_map_js(config: &str, request: &str) -> Result<String, JsError> {
    outbreak_map_json(config, request).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn presets() -> String {
    presets_json()
}
