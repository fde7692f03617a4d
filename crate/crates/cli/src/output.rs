use serde_json::{Map, Number, Value};

/// `v` with ten significant digits, fixed-point for moderate magnitudes.
pub fn real(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.9e}");
    let exponent: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..15).contains(&exponent) {
        format!("{:.*}", (9 - exponent).max(0) as usize, v)
    } else {
        sci
    }
}

fn round_real(v: f64) -> f64 {
    format!("{v:.9e}").parse().unwrap_or(v)
}

/// Rounds every non-integer number in `value` to ten significant digits.
pub fn round_reals(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let r = round_real(n.as_f64().unwrap_or_default());
            Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_reals).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_reals(v))).collect())
        }
        other => other,
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => "none".into(),
        Value::Number(n) if n.is_f64() => real(n.as_f64().unwrap_or_default()),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Bool(b) => b.to_string(),
        Value::Array(_) | Value::Object(_) => value.to_string(),
    }
}

fn flatten_into(prefix: &str, map: &Map<String, Value>, out: &mut String) {
    for (key, value) in map {
        let name = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            Value::Object(inner) => flatten_into(&name, inner, out),
            other => {
                out.push_str(&name);
                out.push(' ');
                out.push_str(&scalar(other));
                out.push('\n');
            }
        }
    }
}

/// One `key value` line per leaf, nested keys joined by dots.
pub fn key_value_lines(value: &Value) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) => flatten_into("", map, &mut out),
        other => {
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
    out
}
