//! Report assembly and rendering (JSON, CSV, text).

use serde_json::{json, Map, Value};
use treedim_core::order::LogOrder;

use crate::specfile::SCHEMA_VERSION;

/// Output format of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A float rounded to 12 significant digits, as a JSON number.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(rounded)
}

/// The same rounding as [`num`], for CSV and text cells.
pub fn fmt_float(x: f64) -> String {
    match num(x) {
        Value::Number(n) => n.to_string(),
        _ => String::from("nan"),
    }
}

pub fn log_json(log: &LogOrder) -> Value {
    json!({
        "base": log.base,
        "value": num(log.value),
        "exact": log.exact.map(|(n, d)| json!([n, d])),
    })
}

/// `num/den`, `num` when the denominator is 1, or the rounded float.
pub fn log_text(log: &LogOrder) -> String {
    match log.exact {
        Some((n, 1)) => n.to_string(),
        Some((n, d)) => format!("{n}/{d}"),
        None => fmt_float(log.value),
    }
}

/// Results for one group.
#[derive(Clone, Debug, Default)]
pub struct Section {
    pub group: String,
    /// JSON object describing the group's results.
    pub json: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Summary lines appended after the rows in text output.
    pub notes: Vec<String>,
}

impl Section {
    pub fn new(group: &str, header: &[&'static str]) -> Self {
        let mut json = Map::new();
        json.insert("group".into(), json!(group));
        Self {
            group: group.to_string(),
            json,
            header: header.to_vec(),
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.json.insert(key.to_string(), value);
    }
}

/// A whole run, ready to render.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: &'static str,
    pub sections: Vec<Section>,
    pub truncated: bool,
    pub errors: Vec<String>,
    pub failed: bool,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            sections: Vec::new(),
            truncated: false,
            errors: Vec::new(),
            failed: false,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "truncated": self.truncated,
            "passed": !self.failed,
            "errors": self.errors,
            "results": self.sections.iter().map(|s| Value::Object(s.json.clone())).collect::<Vec<_>>(),
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# schema_version: {SCHEMA_VERSION}\n# command: {}\n",
            self.command
        );
        if self.truncated {
            out.push_str("# truncated\n");
        }
        for e in &self.errors {
            out.push_str(&format!("# error: {e}\n"));
        }
        for section in &self.sections {
            out.push_str(&format!("# group: {}\n", section.group));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&section.header).expect("in-memory csv");
            for row in &section.rows {
                w.write_record(row).expect("in-memory csv");
            }
            out.push_str(
                &String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv"),
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for section in &self.sections {
            out.push_str(&format!("== {} ({})\n", section.group, self.command));
            let widths: Vec<usize> = (0..section.header.len())
                .map(|i| {
                    section
                        .rows
                        .iter()
                        .map(|r| r.get(i).map_or(0, |c| c.len()))
                        .chain([section.header[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: Vec<&str>| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            out.push_str(&line(section.header.clone()));
            for row in &section.rows {
                out.push_str(&line(row.iter().map(String::as_str).collect()));
            }
            for note in &section.notes {
                out.push_str(note);
                out.push('\n');
            }
        }
        for e in &self.errors {
            out.push_str(&format!("error: {e}\n"));
        }
        if self.truncated {
            out.push_str("truncated: a resource limit stopped the run early\n");
        }
        out.push_str(if self.failed { "FAILED\n" } else { "ok\n" });
        out
    }
}
