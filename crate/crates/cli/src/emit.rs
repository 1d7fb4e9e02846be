use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use svg::node::element::{Line, Polyline, Rectangle, Text};
use svg::Document;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "1";

/// One table cell. Reals are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }

    fn from_json(v: &Value) -> std::result::Result<Self, String> {
        Ok(match v {
            Value::Null => Cell::Empty,
            Value::Bool(b) => Cell::Bool(*b),
            Value::String(s) => Cell::Text(s.clone()),
            Value::Number(n) if n.is_f64() => Cell::Num(n.as_f64().expect("f64 number")),
            Value::Number(n) => Cell::Int(
                n.as_i64()
                    .ok_or_else(|| format!("integer out of range: {n}"))?,
            ),
            other => return Err(format!("unexpected table cell {other}")),
        })
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(_) | Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    fn from_json(v: &Value) -> std::result::Result<Self, String> {
        let columns = v["columns"]
            .as_array()
            .ok_or("table has no `columns` array")?
            .iter()
            .map(|c| {
                c.as_str()
                    .map(String::from)
                    .ok_or("column names must be strings")
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let rows = v["rows"]
            .as_array()
            .ok_or("table has no `rows` array")?
            .iter()
            .map(|r| {
                let cells = r.as_array().ok_or("rows must be arrays")?;
                if cells.len() != columns.len() {
                    return Err(format!(
                        "row has {} cells, expected {}",
                        cells.len(),
                        columns.len()
                    ));
                }
                cells.iter().map(Cell::from_json).collect()
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(Self { columns, rows })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Format {
            path: PathBuf::from("<csv>"),
            message: e.to_string(),
        };
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))
                .map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Format {
            path: PathBuf::from("<csv>"),
            message: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// A named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

/// The outcome of one analysis.
#[derive(Debug, Clone)]
pub struct Report {
    pub analysis: &'static str,
    pub model: Value,
    pub integrator: Value,
    pub verdict: Option<String>,
    pub results: Map<String, Value>,
    pub table: Table,
    pub plot: Option<Plot>,
    pub summary: String,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "analysis": self.analysis,
            "model": self.model,
            "integrator": self.integrator,
            "verdict": self.verdict,
            "results": self.results,
            "table": self.table.to_json(),
        })
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Regenerates the CSV of a JSON result document.
pub fn csv_from_json(text: &str, origin: &Path) -> Result<String> {
    let fail = |message: String| CliError::Format {
        path: origin.to_path_buf(),
        message,
    };
    let doc: Value = serde_json::from_str(text).map_err(|e| fail(e.to_string()))?;
    match doc.get("schema_version").and_then(Value::as_str) {
        Some(SCHEMA_VERSION) => {}
        other => return Err(fail(format!("unsupported schema_version {other:?}"))),
    }
    let table = Table::from_json(&doc["table"]).map_err(fail)?;
    table.to_csv()
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect()
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Polyline chart with axes, five ticks per axis and a legend when there
/// are few series. Non-finite points break a line.
pub fn render_svg(plot: &Plot) -> String {
    let (w, h) = (720.0, 460.0);
    let (left, right, top, bottom) = (80.0, 20.0, 40.0, 60.0);
    let all = || plot.series.iter().flat_map(|s| s.points.iter());
    let (x_lo, x_hi) = bounds(all().map(|p| p.0));
    let (y_lo, y_hi) = bounds(all().map(|p| p.1));
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (w - left - right);
    let sy = |y: f64| h - bottom - (y - y_lo) / (y_hi - y_lo) * (h - top - bottom);

    let mut doc = Document::new()
        .set("xmlns", "http://www.w3.org/2000/svg")
        .set("width", w)
        .set("height", h)
        .set("viewBox", (0, 0, w, h))
        .add(
            Rectangle::new()
                .set("width", w)
                .set("height", h)
                .set("fill", "white"),
        )
        .add(
            Text::new(plot.title.clone())
                .set("x", w / 2.0)
                .set("y", 24)
                .set("text-anchor", "middle")
                .set("font-family", "sans-serif")
                .set("font-size", 16),
        );
    let axis = |x1: f64, y1: f64, x2: f64, y2: f64| {
        Line::new()
            .set("x1", x1)
            .set("y1", y1)
            .set("x2", x2)
            .set("y2", y2)
            .set("stroke", "black")
    };
    doc = doc
        .add(axis(left, h - bottom, w - right, h - bottom))
        .add(axis(left, top, left, h - bottom));
    let label = |s: String, x: f64, y: f64, anchor: &str| {
        Text::new(s)
            .set("x", x)
            .set("y", y)
            .set("text-anchor", anchor)
            .set("font-family", "sans-serif")
            .set("font-size", 11)
    };
    for t in ticks(x_lo, x_hi) {
        doc = doc
            .add(axis(sx(t), h - bottom, sx(t), h - bottom + 5.0))
            .add(label(format!("{t:.4}"), sx(t), h - bottom + 18.0, "middle"));
    }
    for t in ticks(y_lo, y_hi) {
        doc = doc.add(axis(left - 5.0, sy(t), left, sy(t))).add(label(
            format!("{t:.4}"),
            left - 8.0,
            sy(t) + 4.0,
            "end",
        ));
    }
    doc = doc
        .add(
            label(
                plot.x_label.clone(),
                (left + w - right) / 2.0,
                h - 15.0,
                "middle",
            )
            .set("font-size", 13),
        )
        .add(
            label(plot.y_label.clone(), 0.0, 0.0, "middle")
                .set("font-size", 13)
                .set(
                    "transform",
                    format!("translate(18 {}) rotate(-90)", (top + h - bottom) / 2.0),
                ),
        );

    for (i, s) in plot.series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut group = svg::node::element::Group::new().set("id", format!("series-{i}"));
        for run in s.points.split(|p| !(p.0.is_finite() && p.1.is_finite())) {
            if run.is_empty() {
                continue;
            }
            let mut pts = String::new();
            for (x, y) in run {
                let _ = write!(pts, "{:.3},{:.3} ", sx(*x), sy(*y));
            }
            group = group.add(
                Polyline::new()
                    .set("points", pts.trim_end())
                    .set("fill", "none")
                    .set("stroke", colour)
                    .set("stroke-width", 1.2),
            );
        }
        doc = doc.add(group);
        if plot.series.len() <= 8 {
            doc = doc.add(
                label(
                    s.label.clone(),
                    w - right - 8.0,
                    top + 14.0 * (i as f64 + 1.0),
                    "end",
                )
                .set("fill", colour),
            );
        }
    }
    let mut out = doc.to_string();
    out.push('\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub fn format_of(path: &Path) -> Result<Format> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some("svg") => Ok(Format::Svg),
        _ => Err(CliError::usage(format!(
            "cannot infer the output format of {} (use .csv, .json or .svg)",
            path.display()
        ))),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Run metadata kept out of the data files so those stay reproducible.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn write_sidecar(path: &Path, meta: &Value) -> Result<()> {
    write_file(&sidecar_path(path), &json_text(meta))
}
