//! Artifact rendering with fixed precision: every float carries at most 9
//! significant digits so that reruns compare byte for byte.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn round9(v: f64) -> f64 {
    format!("{v:.8e}").parse().expect("formatted float parses")
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round9(n.as_f64().expect("f64 number"));
            Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| CliError::Config(format!("serialization failed: {e}")))
}

pub fn config_value(config: &RunConfig) -> Value {
    Value::Object(
        config
            .entries()
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect(),
    )
}

/// `{"command", "version", "config", ...fields}` with floats rounded,
/// pretty-printed with a trailing newline.
pub fn render_json(command: &str, config: &RunConfig, fields: Vec<(&str, Value)>) -> String {
    let mut map = Map::new();
    map.insert("command".into(), Value::String(command.into()));
    map.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    map.insert("config".into(), config_value(config));
    for (k, v) in fields {
        map.insert(k.into(), round_value(v));
    }
    let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values serialize");
    out.push('\n');
    out
}

/// Formats a float with 9 significant digits for CSV cells.
pub fn cell(v: f64) -> String {
    placeability::oracle::sig9(v)
}
