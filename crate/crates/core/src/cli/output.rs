use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

/// Rounds every float to 9 significant digits.
fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float");
            Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push_str(&format!("{prefix}\t{s}\n")),
        other => out.push_str(&format!("{prefix}\t{other}\n")),
    }
}

pub fn render<T: Serialize>(report: &T, format: Format) -> Result<String> {
    let value = serde_json::to_value(report).map_err(|e| Error::Io(format!("cannot serialize report: {e}")))?;
    let value = round_value(value);
    Ok(match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Tsv => {
            let mut s = String::from("field\tvalue\n");
            flatten("", &value, &mut s);
            s
        }
    })
}
