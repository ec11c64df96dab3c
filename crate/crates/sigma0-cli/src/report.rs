//! Rendering of command results as JSON, CSV or aligned text.

use std::fmt::Write as _;

use anyhow::Result;
use serde_json::{Map, Value};

use crate::config::Format;

/// Fixed 12-significant-digit rendering, trailing zeros trimmed.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&e) {
        format!("{:.*}", (11 - e).max(0) as usize, x)
    } else {
        let s = format!("{x:.11e}");
        let (m, exp) = s.split_once('e').expect("exponent form");
        return format!("{}e{exp}", trim(m));
    };
    trim(&s)
}

fn trim(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

/// A number as JSON, carrying only the digits `num` prints.
pub fn jnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    num(x).parse::<f64>().map(Value::from).unwrap_or(Value::Null)
}

pub fn jopt(x: Option<f64>) -> Value {
    x.map(jnum).unwrap_or(Value::Null)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()).map(num).unwrap_or_else(|| n.to_string()),
        v => v.to_string(),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub fields: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Section {
    pub fn new(name: &str) -> Self {
        Section { name: name.into(), ..Default::default() }
    }

    pub fn field(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.fields.push((k.into(), v.into()));
        self
    }

    pub fn notes(mut self, notes: &[(String, String)]) -> Self {
        let m: Map<String, Value> = notes.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        self.fields.push(("notes".into(), Value::Object(m)));
        self
    }

    pub fn columns(mut self, cols: &[&str]) -> Self {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, r: Vec<Value>) {
        self.rows.push(r);
    }

    fn to_json(&self) -> Value {
        let mut m: Map<String, Value> = self.fields.iter().cloned().collect();
        if !self.columns.is_empty() {
            let rows = self
                .rows
                .iter()
                .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
                .collect();
            m.insert("rows".into(), Value::Array(rows));
        }
        Value::Object(m)
    }
}

/// Output of one command: sections plus the configuration they came from.
pub struct Report {
    pub command: String,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn new(command: &str, sections: Vec<Section>) -> Self {
        Report { command: command.into(), sections }
    }

    pub fn to_json(&self, config: &Value, digest: &str) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert("config".into(), config.clone());
        m.insert("config_digest".into(), Value::String(digest.into()));
        for s in &self.sections {
            m.insert(s.name.clone(), s.to_json());
        }
        Value::Object(m)
    }

    pub fn render(&self, format: Format, config: &Value, digest: &str) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.to_json(config, digest))? + "\n"),
            Format::Csv => self.csv(digest),
            Format::Text => Ok(self.text(digest)),
        }
    }

    fn csv(&self, digest: &str) -> Result<String> {
        let mut out = format!("# command: {}\n# config_digest: {digest}\n", self.command);
        for s in &self.sections {
            let _ = writeln!(out, "# section: {}", s.name);
            for (k, v) in &s.fields {
                let _ = writeln!(out, "# {k}: {}", cell(v));
            }
            if s.columns.is_empty() {
                continue;
            }
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&s.columns)?;
            for r in &s.rows {
                w.write_record(r.iter().map(cell))?;
            }
            out.push_str(&String::from_utf8(w.into_inner()?)?);
        }
        Ok(out)
    }

    fn text(&self, digest: &str) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if self.sections.len() > 1 {
                let _ = writeln!(out, "[{}]", s.name);
            }
            for (k, v) in &s.fields {
                match v {
                    Value::Object(m) => {
                        for (k2, v2) in m {
                            let _ = writeln!(out, "{k}.{k2} : {}", cell(v2));
                        }
                    }
                    v => {
                        let _ = writeln!(out, "{k} : {}", cell(v));
                    }
                }
            }
            if s.columns.is_empty() {
                continue;
            }
            let cells: Vec<Vec<String>> = s.rows.iter().map(|r| r.iter().map(cell).collect()).collect();
            let widths: Vec<usize> = (0..s.columns.len())
                .map(|j| cells.iter().map(|r| r[j].len()).chain([s.columns[j].len()]).max().unwrap_or(0))
                .collect();
            let line = |r: &[String]| -> String {
                let v: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                v.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&s.columns));
            for r in &cells {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        let _ = writeln!(out, "config_digest : {digest}");
        out
    }
}
