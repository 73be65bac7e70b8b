//! Result documents and their CSV and JSON encodings.
//!
//! A document carries the schema version, the command, its resolved config,
//! a summary and the records. JSON holds all of it. CSV puts the header part
//! on a leading `#` comment line, then one row per record with nested
//! objects flattened to dotted columns and arrays written as compact JSON.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub command: String,
    pub config: Value,
    pub summary: Value,
    pub records: Vec<Value>,
}

impl Document {
    fn header(&self) -> Value {
        json!({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
        })
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut doc = self.header();
        doc["summary"] = self.summary.clone();
        doc["records"] = Value::Array(self.records.clone());
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<(String, String)>> = self.records.iter().map(flatten_record).collect();
        let mut columns: Vec<String> = Vec::new();
        for row in &rows {
            for (key, _) in row {
                if !columns.contains(key) {
                    columns.push(key.clone());
                }
            }
        }
        let mut bytes = format!("# {}\n", serde_json::to_string(&self.header())?).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(&columns)?;
            for row in &rows {
                w.write_record(
                    columns
                        .iter()
                        .map(|c| row.iter().find(|(k, _)| k == c).map_or("", |(_, v)| v.as_str())),
                )?;
            }
            w.flush()?;
        }
        Ok(bytes)
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Column name and cell text for every leaf of `record`.
pub fn flatten_record(record: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", record, &mut out);
    out
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        _ => out.push((prefix.to_string(), cell_text(value))),
    }
}

/// Cell text for a leaf: strings verbatim, null empty, everything else as JSON.
pub fn cell_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Leaves of `record` keyed by flattened column name.
pub fn flatten_values(record: &Value) -> Map<String, Value> {
    fn walk(prefix: &str, value: &Value, out: &mut Map<String, Value>) {
        match value {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            _ => {
                out.insert(prefix.to_string(), value.clone());
            }
        }
    }
    let mut out = Map::new();
    walk("", record, &mut out);
    out
}

/// Writes `bytes` to `path`, or to `stdout` when no path is given.
pub fn write_output(bytes: &[u8], path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => stdout.write_all(bytes).context("cannot write to standard output"),
    }
}

/// Refuses to emit a document without records.
pub fn ensure_nonempty(doc: &Document) -> Result<()> {
    if doc.records.is_empty() {
        bail!("{}: the selected parameters produce no results", doc.command);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        Document {
            command: "t".into(),
            config: json!({"seed": 0}),
            summary: json!({"count": 2}),
            records: vec![
                json!({"a": 1, "b": {"c": "01,1", "d": [0.5, 1e-20]}, "e": null}),
                json!({"a": 2.5, "b": {"c": "x\"y", "d": []}, "e": true}),
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(doc().to_csv().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            r#"# {"command":"t","config":{"seed":0},"schema":1}"#
        );
        assert_eq!(lines.next().unwrap(), "a,b.c,b.d,e");
        assert_eq!(lines.next().unwrap(), r#"1,"01,1","[0.5,1e-20]","#);
        assert_eq!(lines.next().unwrap(), r#"2.5,"x""y",[],true"#);
        assert!(lines.next().is_none());
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&doc().to_json().unwrap()).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        assert_eq!(v["summary"]["count"], 2);
    }

    #[test]
    fn empty_is_refused() {
        let mut d = doc();
        d.records.clear();
        assert!(ensure_nonempty(&d).is_err());
    }
}
