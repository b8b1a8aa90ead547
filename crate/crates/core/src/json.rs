//! Deterministic JSON: sorted keys and every float written with 17
//! significant digits, which round-trips binary64 exactly.

use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

/// `v` formatted with 17 significant digits, e.g. `3.3333333333333331e-1`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("float number");
            *v = if f.is_finite() {
                Value::Number(Number::from_str(&format_f64(f)).expect("valid JSON number"))
            } else {
                Value::Null
            };
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

/// The canonical value tree of `value`.
pub fn to_value<T: Serialize>(value: &T) -> serde_json::Result<Value> {
    let mut v = serde_json::to_value(value)?;
    canonicalize(&mut v);
    Ok(v)
}

/// Pretty-printed canonical JSON.
pub fn to_string_pretty<T: Serialize>(value: &T) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&to_value(value)?)
}
