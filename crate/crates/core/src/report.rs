//! Report records and their text renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::set::{ElementSet, MultisetSequence};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serialize a set as its sorted member list.
pub fn ser_set<S: Serializer>(set: &ElementSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter())
}

/// Serialize a sequence as its expanded, sorted item list.
pub fn ser_seq<S: Serializer>(seq: &MultisetSequence, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(seq.items())
}

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Round every float inside a JSON value to 12 significant digits.
pub fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(xs) => xs.iter_mut().for_each(normalize),
        Value::Object(m) => m.values_mut().for_each(normalize),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    let mut v = serde_json::to_value(x).expect("report payloads serialize");
    normalize(&mut v);
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    /// Full parameter echo: group, inputs, seed, budgets.
    pub params: Value,
    pub group: Option<String>,
    pub summary: String,
    pub passed: bool,
    pub truncated: bool,
    pub verdict: Value,
    /// Excluded from determinism comparisons.
    pub elapsed_ms: f64,
}

impl AnalysisReport {
    pub fn new(command: &str, params: Value, group: Option<&GroupSpec>, verdict: Value) -> Self {
        let (mut params, mut verdict) = (params, verdict);
        normalize(&mut params);
        normalize(&mut verdict);
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            params,
            group: group.map(|g| g.canonical_key().to_string()),
            summary: String::new(),
            passed: true,
            truncated: false,
            verdict,
            elapsed_ms: 0.0,
        }
    }

    pub fn summary(mut self, s: impl Into<String>) -> Self {
        self.summary = s.into();
        self
    }

    pub fn passed(mut self, ok: bool) -> Self {
        self.passed = ok;
        self
    }

    pub fn truncated(mut self, t: bool) -> Self {
        self.truncated = t;
        self
    }

    pub fn elapsed(mut self, ms: f64) -> Self {
        self.elapsed_ms = round12(ms);
        self
    }

    /// The report with timing zeroed, for determinism and cache checks.
    pub fn without_timing(&self) -> Self {
        AnalysisReport {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
    Table,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(Error::Parse(format!("unknown format {s:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "schema_version",
    "command",
    "group",
    "passed",
    "truncated",
    "summary",
    "elapsed_ms",
    "verdict",
];

pub fn to_jsonl_line(r: &AnalysisReport) -> String {
    serde_json::to_string(r).expect("reports serialize")
}

pub fn parse_jsonl_line(line: &str) -> Result<AnalysisReport> {
    serde_json::from_str(line).map_err(|e| Error::Parse(e.to_string()))
}

fn csv_row(r: &AnalysisReport) -> [String; 8] {
    [
        r.schema_version.to_string(),
        r.command.clone(),
        r.group.clone().unwrap_or_default(),
        r.passed.to_string(),
        r.truncated.to_string(),
        r.summary.clone(),
        r.elapsed_ms.to_string(),
        serde_json::to_string(&r.verdict).expect("verdicts serialize"),
    ]
}

pub fn render(reports: &[AnalysisReport], format: Format) -> String {
    match format {
        Format::Jsonl => reports.iter().map(|r| to_jsonl_line(r) + "\n").collect(),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for r in reports {
                w.write_record(csv_row(r)).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
        }
        Format::Table => render_table(reports),
    }
}

fn render_table(reports: &[AnalysisReport]) -> String {
    let head = ["group", "command", "passed", "truncated", "summary"];
    let rows: Vec<[String; 5]> = reports
        .iter()
        .map(|r| {
            [
                r.group.clone().unwrap_or_else(|| "-".into()),
                r.command.clone(),
                r.passed.to_string(),
                r.truncated.to_string(),
                r.summary.clone(),
            ]
        })
        .collect();
    let mut widths = head.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&head);
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&cells);
    }
    out
}
