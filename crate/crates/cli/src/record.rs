//! Output records. The machine format prints one JSON object per line; the
//! table format is rendered from the same records.

use std::collections::BTreeMap;
use std::fmt::Write;

use kvar::quotient::ComputationTrace;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
    Error,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub command: String,
    pub item: String,
    pub status: Status,
    pub data: BTreeMap<String, Value>,
}

impl Record {
    pub fn new(command: &str, item: impl Into<String>, status: Status) -> Self {
        Record { command: command.into(), item: item.into(), status, data: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.data.insert(key.into(), serde_json::to_value(value).expect("record values serialize"));
        self
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.data.insert(key.into(), serde_json::to_value(value).expect("record values serialize"));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Table,
    Machine,
}

pub fn render(records: &[Record], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Machine => {
            for r in records {
                out.push_str(&serde_json::to_string(r).expect("records serialize"));
                out.push('\n');
            }
        }
        Format::Table => {
            let width = records.iter().map(|r| r.item.len()).max().unwrap_or(0).min(40);
            for r in records {
                let _ = write!(out, "{:<5} {:<width$}", r.status.label(), r.item);
                let mut trace = None;
                for (k, v) in &r.data {
                    if k == "trace" {
                        trace = serde_json::from_value::<ComputationTrace>(v.clone()).ok();
                        continue;
                    }
                    let text = match v {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = write!(out, "  {k}={text}");
                }
                out.push('\n');
                if let Some(t) = trace {
                    for line in t.to_string().lines() {
                        let _ = writeln!(out, "      {line}");
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_lines_parse_back() {
        let recs = vec![Record::new("c", "a", Status::Pass).with("z", 1).with("b", "x"), Record::new("c", "b", Status::Fail)];
        let text = render(&recs, Format::Machine);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].find("\"b\"").unwrap() < lines[0].find("\"z\"").unwrap());
        let v: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        assert_eq!(v["status"], "fail");
    }

    #[test]
    fn table_shows_status_and_pairs() {
        let text = render(&[Record::new("c", "item", Status::Info).with("k", "v")], Format::Table);
        assert_eq!(text.trim_end(), "INFO  item  k=v");
    }
}
