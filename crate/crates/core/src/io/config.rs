use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use super::presets::preset;
use crate::batch::{Axis, SweepSpec, DEFAULT_REPLICATES};
use crate::engine::SimulationConfig;
use crate::{Error, Result};

fn join(prefix: &str, path: &str) -> String {
    match (prefix.is_empty(), path) {
        (true, _) => path.to_owned(),
        (false, ".") => prefix.to_owned(),
        (false, _) => format!("{prefix}.{path}"),
    }
}

fn deserialize<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = join(prefix, &e.path().to_string());
        Error::config(path, e.into_inner().to_string())
    })
}

/// Recursively merges `over` into `base`; non-object values replace.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn parse_document(text: &str) -> Result<Value> {
    if text.trim().is_empty() {
        return Ok(Value::Object(Map::new()));
    }
    serde_json::from_str(text).map_err(|e| Error::config("", format!("malformed document: {e}")))
}

/// Expands a `preset` key, then merges the remaining keys over the preset.
fn expand_preset(doc: Value, prefix: &str) -> Result<Value> {
    let Value::Object(mut fields) = doc else {
        return Err(Error::config(prefix, "expected a JSON object"));
    };
    let Some(name) = fields.remove("preset") else {
        return Ok(Value::Object(fields));
    };
    let path = join(prefix, "preset");
    let name = name
        .as_str()
        .ok_or_else(|| Error::config(&path, "preset must be a string"))?;
    let mut expanded =
        preset(name).ok_or_else(|| Error::config(&path, format!("unknown preset `{name}`")))?;
    merge(&mut expanded, Value::Object(fields));
    Ok(expanded)
}

fn config_from_value(doc: Value, prefix: &str) -> Result<SimulationConfig> {
    let config: SimulationConfig = deserialize(expand_preset(doc, prefix)?, prefix)?;
    config.validate().map_err(|e| match e {
        Error::Parameter { field, message } => Error::config(join(prefix, &field), message),
        other => other,
    })?;
    Ok(config)
}

/// Parses and validates a run configuration. An empty document yields the
/// defaults.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    config_from_value(parse_document(text)?, "")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDocument {
    #[serde(default)]
    base: Value,
    #[serde(default)]
    axes: Vec<Axis>,
    #[serde(default = "default_replicates")]
    replicates: usize,
    #[serde(default)]
    master_seed: u64,
}

fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}

/// Parses a sweep: `{"base": <config>, "axes": [...], "replicates": n,
/// "master_seed": s}`. Every grid point is resolved and validated.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let doc: SweepDocument = deserialize(parse_document(text)?, "")?;
    let base = match doc.base {
        Value::Null => Value::Object(Map::new()),
        other => other,
    };
    let sweep = SweepSpec::new(
        config_from_value(base, "base")?,
        doc.axes,
        doc.replicates,
        doc.master_seed,
    );
    sweep.grid()?;
    Ok(sweep)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    parse_config(&read(path)?)
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    parse_sweep(&read(path)?)
}

/// Canonical JSON form of a configuration; [`parse_config`] reads it back
/// unchanged.
pub fn render_config(config: &SimulationConfig) -> String {
    serde_json::to_string_pretty(config).expect("configuration serializes")
}
