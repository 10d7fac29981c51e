//! Deterministic emission of JSON summaries, CSV tables and SVG charts.
//!
//! Every float is written with 17 significant digits (`{:.16e}`); non-finite values
//! become `null` in JSON and an empty cell in CSV. Keys are sorted, and nothing
//! depends on time or on the output location, so equal configs give equal bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::{Command, RunConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Pretty JSON with fixed-width scientific floats.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string(value: &Value) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// One line of an SVG chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub name: &'static str,
    pub title: String,
    pub x_label: &'static str,
    pub log_x: bool,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

impl Chart {
    pub fn render(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 50.0);
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (tx(x), y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let span = |f: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
        };
        let (x0, x1) = span(|p| p.0);
        let (y0, y1) = span(|p| p.1);
        let px = |x: f64| pad + (tx(x) - x0) / (x1 - x0) * (w - 2.0 * pad);
        let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
            h - pad,
            w - pad
        );
        let x_name = if self.log_x { format!("log10 {}", self.x_label) } else { self.x_label.to_string() };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, w / 2.0, h - 12.0, escape(&x_name));
        let _ = writeln!(s, r#"<text x="{pad}" y="{}" font-size="10">{y0:.6e}</text>"#, h - pad + 14.0);
        let _ = writeln!(s, r#"<text x="4" y="{}" font-size="10">{y1:.6e}</text>"#, pad - 6.0);
        for (i, series) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| tx(*x).is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}"/>"#, path.join(" "));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{}</text>"#,
                w - pad - 150.0,
                pad + 14.0 * (i as f64 + 1.0),
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A tolerance check whose failure maps to exit status 2.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    AccuracyFailure,
    NonConvergence,
}

impl Status {
    pub fn exit_code(&self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::AccuracyFailure => 2,
            Status::NonConvergence => 3,
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub results: Value,
    /// Result key → producing operation.
    pub provenance: BTreeMap<String, String>,
    pub tables: Vec<Table>,
    pub charts: Vec<Chart>,
    pub checks: Vec<Check>,
    pub converged: bool,
}

impl Report {
    pub fn new(results: Value) -> Self {
        Self {
            results,
            provenance: BTreeMap::new(),
            tables: Vec::new(),
            charts: Vec::new(),
            checks: Vec::new(),
            converged: true,
        }
    }

    pub fn source(&mut self, key: &str, op: &str) {
        self.provenance.insert(key.to_string(), op.to_string());
    }

    pub fn status(&self) -> Status {
        if !self.converged {
            Status::NonConvergence
        } else if self.checks.iter().any(|c| !c.pass) {
            Status::AccuracyFailure
        } else {
            Status::Ok
        }
    }

    fn file_stem(command: Command) -> String {
        command.name().replace('-', "_")
    }

    /// Assembles the JSON document.
    pub fn document(&self, config: &RunConfig) -> Result<Value, CliError> {
        let stem = Self::file_stem(config.command);
        let mut files: Vec<String> = self.tables.iter().map(|t| format!("{stem}_{}.csv", t.name)).collect();
        if config.svg {
            files.extend(self.charts.iter().map(|c| format!("{stem}_{}.svg", c.name)));
        }
        Ok(serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": config.command.name(),
            "status": self.status(),
            "config": config,
            "provenance": self.provenance,
            "checks": self.checks,
            "results": self.results,
            "files": files,
        }))
    }

    /// Writes every artifact into `config.out_dir`; returns the paths written.
    pub fn write(&self, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
        let dir = &config.out_dir;
        std::fs::create_dir_all(dir)?;
        let stem = Self::file_stem(config.command);
        let mut written = Vec::new();
        let mut put = |path: PathBuf, body: &str| -> Result<(), CliError> {
            write_atomic(&path, body)?;
            written.push(path);
            Ok(())
        };
        put(dir.join(format!("{stem}.json")), &to_json_string(&self.document(config)?)?)?;
        for t in &self.tables {
            put(dir.join(format!("{stem}_{}.csv", t.name)), &t.render())?;
        }
        if config.svg {
            for c in &self.charts {
                put(dir.join(format!("{stem}_{}.svg", c.name)), &c.render())?;
            }
        }
        Ok(written)
    }
}

fn write_atomic(path: &Path, body: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, body)?;
    std::fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_num(-0.1), "-1.0000000000000001e-1");
        assert_eq!(fmt_num(f64::NAN), "");
        let v: f64 = fmt_num(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn json_floats_fixed_and_nonfinite_null() {
        let v = serde_json::json!({"a": 0.5, "b": [1, 2.0], "c": f64::INFINITY});
        let s = to_json_string(&v).unwrap();
        assert!(s.contains("\"a\": 5.0000000000000000e-1"));
        assert!(s.contains("2.0000000000000000e0"));
        assert!(s.contains("\"c\": null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], 0.5);
        assert_eq!(back["b"][0], 1);
    }

    #[test]
    fn table_render() {
        let mut t = Table::new("x", &["eps", "value"]);
        t.push(vec![fmt_num(0.25), fmt_num(2.0)]);
        assert_eq!(t.render(), "eps,value\n2.5000000000000000e-1,2.0000000000000000e0\n");
    }

    #[test]
    fn chart_is_wellformed() {
        let c = Chart {
            name: "c",
            title: "Q <eps>".into(),
            x_label: "eps",
            log_x: true,
            series: vec![Series {
                label: "q".into(),
                points: vec![(1e-3, 1.0), (1e-2, 2.0), (1e-1, f64::NAN)],
            }],
        };
        let s = c.render();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("Q &lt;eps&gt;"));
        assert_eq!(s.matches("<polyline").count(), 1);
    }
}
