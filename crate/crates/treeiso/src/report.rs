//! Output documents: the resolved config plus a table of results.

use std::io::Write;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::failure::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// One JSON document `{config, results, ...}`.
    Json,
    /// A `{"config": ...}` line followed by one object per result row.
    Jsonl,
    /// A `# config: {...}` line, a header row, then one row per result.
    Csv,
}

/// Rows with a fixed column order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn objects(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
            .collect()
    }
}

/// Everything a command prints.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub config: Value,
    pub table: Table,
    /// Extra top-level entries, JSON only.
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(config: impl Serialize, table: Table) -> Outcome<Self> {
        Ok(Report { config: serde_json::to_value(config)?, table, extra: Map::new() })
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Outcome<()> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("config".into(), self.config.clone());
                doc.insert("results".into(), Value::Array(self.table.objects()));
                for (k, v) in &self.extra {
                    doc.insert(k.clone(), v.clone());
                }
                serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
                writeln!(out)?;
            }
            Format::Jsonl => {
                let mut head = Map::new();
                head.insert("config".into(), self.config.clone());
                serde_json::to_writer(&mut *out, &Value::Object(head))?;
                writeln!(out)?;
                for o in self.table.objects() {
                    serde_json::to_writer(&mut *out, &o)?;
                    writeln!(out)?;
                }
            }
            Format::Csv => {
                writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(&self.table.columns)?;
                for r in &self.table.rows {
                    w.write_record(r.iter().map(cell))?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec![json!(1), json!("1")]);
        t.push(vec![json!(3), json!("5/9")]);
        Report::new(json!({"command": "exact"}), t).unwrap()
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# config: {\"command\":\"exact\"}\nn,value\n1,1\n3,5/9\n");
    }

    #[test]
    fn jsonl_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Jsonl, &mut buf).unwrap();
        let lines: Vec<Value> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], json!({"n": 3, "value": "5/9"}));
    }

    #[test]
    fn json_keeps_column_order() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.find("\"n\"").unwrap() < s.find("\"value\"").unwrap());
    }
}
