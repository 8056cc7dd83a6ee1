use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Command, Flags, Format};

pub struct Report {
    pub command: Command,
    pub config: Value,
    pub results: Value,
    pub evidence: Vec<Value>,
    pub csv: Option<Csv>,
    pub undecided: bool,
}

/// Rows for the fixed-header CSV output.
pub struct Csv {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// `{kind, parameters, data}` from a tagged evidence payload.
pub fn evidence_entry(payload: Value) -> Value {
    let Value::Object(mut map) = payload else {
        return json!({ "kind": "unknown", "parameters": Value::Null, "data": payload });
    };
    let kind = map.remove("kind").unwrap_or(Value::Null);
    let parameters = map.remove("parameters").unwrap_or(Value::Null);
    json!({ "kind": kind, "parameters": parameters, "data": Value::Object(map) })
}

impl Report {
    pub fn new(command: Command, flags: &Flags, results: Value) -> Self {
        Report { command, config: to_value(flags), results, evidence: Vec::new(), csv: None, undecided: false }
    }

    pub fn render(&self, format: Format, duration_ms: u64) -> Result<String, String> {
        match format {
            Format::Json => {
                let v = json!({
                    "command": self.command.name(),
                    "config": self.config,
                    "results": self.results,
                    "evidence": self.evidence,
                    "version": env!("CARGO_PKG_VERSION"),
                    "duration_ms": duration_ms,
                });
                Ok(serde_json::to_string_pretty(&v).expect("json") + "\n")
            }
            Format::Csv => {
                let csv = self.csv.as_ref().ok_or_else(|| {
                    format!("csv output is available for rep, len, dist and partition, not {}", self.command.name())
                })?;
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&csv.header).map_err(|e| e.to_string())?;
                for row in &csv.rows {
                    w.write_record(row).map_err(|e| e.to_string())?;
                }
                String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
            }
            Format::Text => {
                let mut out = format!("{}\n", self.command.name());
                text_lines(&self.results, "", &mut out);
                if !self.evidence.is_empty() {
                    out.push_str(&format!("evidence: {} entries (use --format json for details)\n", self.evidence.len()));
                }
                out.push_str(&format!("duration_ms: {duration_ms}\n"));
                Ok(out)
            }
        }
    }
}

fn text_lines(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(v, &key, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

/// Moves every `evidence` field found in `items` into `evidence`, leaving
/// its index behind.
pub fn hoist_evidence(items: &mut [Value], evidence: &mut Vec<Value>) {
    for item in items {
        if let Value::Object(map) = item {
            if let Some(e) = map.remove("evidence") {
                map.insert("evidence".into(), json!(evidence.len()));
                evidence.push(evidence_entry(e));
            }
        }
    }
}

pub fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evidence_split() {
        let e = evidence_entry(json!({ "kind": "x", "parameters": { "a": 1 }, "b": 2 }));
        assert_eq!(e, json!({ "kind": "x", "parameters": { "a": 1 }, "data": { "b": 2 } }));
        let mut items = vec![json!({ "prime": 2, "evidence": { "kind": "y" } }), json!({ "prime": 3 })];
        let mut ev = Vec::new();
        hoist_evidence(&mut items, &mut ev);
        assert_eq!(items[0]["evidence"], 0);
        assert_eq!(ev.len(), 1);
        assert!(items[1].get("evidence").is_none());
    }
}
