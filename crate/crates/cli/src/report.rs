//! Tabular reports with a metadata header, emitted as CSV or JSON.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "ipdsaw";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Bumped whenever a JSON field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// What every output carries about the run that produced it.
pub struct Meta {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch, only with `--stamp`.
    pub stamp: Option<u64>,
}

impl Meta {
    pub fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>, stamp: bool) -> Self {
        Self {
            command,
            config: serde_json::to_value(config).expect("config serializes"),
            seed,
            stamp: stamp.then(now),
        }
    }

    pub fn comment_lines(&self) -> String {
        let mut s = format!("# tool {TOOL} {VERSION}\n# command {}\n", self.command);
        let _ = writeln!(s, "# config {}", self.config);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed {seed}");
        }
        if let Some(t) = self.stamp {
            let _ = writeln!(s, "# wall_clock_unix {t}");
        }
        s
    }

    fn json_envelope(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("tool".into(), json!(TOOL));
        m.insert("version".into(), json!(VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("config".into(), self.config.clone());
        m.insert("seed".into(), json!(self.seed));
        if let Some(t) = self.stamp {
            m.insert("wall_clock_unix".into(), json!(t));
        }
        m
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// One table plus free-form lines (fits, summaries) and the full result
/// object for JSON.
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub notes: Vec<String>,
    pub result: Value,
}

impl Report {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
            result: Value::Null,
        }
    }

    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, meta: &Meta, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(meta),
            Format::Json => self.render_json(meta),
        }
    }

    fn render_csv(&self, meta: &Meta) -> String {
        let mut s = meta.comment_lines();
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn render_json(&self, meta: &Meta) -> String {
        let mut m = meta.json_envelope();
        let table: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect()))
            .collect();
        m.insert("rows".into(), Value::Array(table));
        if !self.notes.is_empty() {
            m.insert("notes".into(), json!(self.notes));
        }
        m.insert("result".into(), self.result.clone());
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json renders");
        s.push('\n');
        s
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON numbers cannot hold NaN or infinities; those become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("cannot write to stdout")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Report, Meta) {
        let mut r = Report::new(vec!["beta", "name"]);
        r.row(vec![num(0.5), json!("a,b")]);
        r.row(vec![num(f64::NAN), json!("c")]);
        r.notes.push("fit slope=1".into());
        r.result = json!({"k": 1});
        let meta = Meta::new("demo", &json!({"beta": 0.5}), Some(7), false);
        (r, meta)
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let (r, meta) = sample();
        let csv = r.render(&meta, Format::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("# tool ipdsaw {VERSION}"));
        assert!(lines.contains(&"# seed 7"));
        assert!(lines.contains(&"# fit slope=1"));
        assert!(lines.contains(&"beta,name"));
        assert!(lines.contains(&"0.5,\"a,b\""));
        assert!(lines.contains(&"NaN,c"));
        assert!(!csv.contains("wall_clock"));
    }

    #[test]
    fn json_round_trips() {
        let (r, meta) = sample();
        let v: Value = serde_json::from_str(&r.render(&meta, Format::Json)).unwrap();
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
        assert_eq!(v["rows"][0]["name"], json!("a,b"));
        assert_eq!(v["result"]["k"], json!(1));
        assert_eq!(v["config"]["beta"], json!(0.5));
    }
}
