//! Tabular reports and plot data.
//!
//! Every numeric cell keeps its exact value; rendering decides whether it is
//! shown in full or rounded half-even to four places.

use std::fmt::Write as _;

use cosmos_core::money::round_display;
use cosmos_core::Decimal;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(Decimal),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Decimal> for Cell {
    fn from(d: Decimal) -> Self {
        Cell::Num(d)
    }
}

impl From<cosmos_core::Money> for Cell {
    fn from(m: cosmos_core::Money) -> Self {
        Cell::Num(m.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Full,
    Display,
}

impl Cell {
    pub fn render(&self, precision: Precision) -> String {
        match (self, precision) {
            (Cell::Text(s), _) => s.clone(),
            (Cell::Num(d), Precision::Full) => d.normalize().to_string(),
            (Cell::Num(d), Precision::Display) => round_display(*d).to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Tsv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn rendered(&self, precision: Precision) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|c| c.render(precision)).collect())
            .collect()
    }

    pub fn to_csv(&self, precision: Precision) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in self.rendered(precision) {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }

    pub fn to_tsv(&self, precision: Precision) -> String {
        let mut out = self.columns.join("\t");
        out.push('\n');
        for row in self.rendered(precision) {
            let cleaned: Vec<String> = row.iter().map(|c| c.replace(['\t', '\n'], " ")).collect();
            out.push_str(&cleaned.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Rows as objects. Numbers are strings so no precision is lost.
    pub fn to_json_value(&self, precision: Precision) -> Value {
        Value::Array(
            self.rendered(precision)
                .into_iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.into_iter().map(Value::String))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_text(&self, precision: Precision) -> String {
        let rows = self.rendered(precision);
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let numeric: Vec<bool> = (0..self.columns.len())
            .map(|i| {
                !self.rows.is_empty() && self.rows.iter().all(|r| matches!(r[i], Cell::Num(_)))
            })
            .collect();
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, c) in cells.iter().enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                if numeric[i] {
                    let _ = write!(s, "{c:>w$}", w = widths[i]);
                } else {
                    let _ = write!(s, "{c:<w$}", w = widths[i]);
                }
            }
            s.trim_end().to_string() + "\n"
        };
        let mut out = line(&self.columns);
        for row in &rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn render(&self, format: Format, precision: Precision) -> String {
        match format {
            Format::Text => self.to_text(precision),
            Format::Csv => self.to_csv(precision),
            Format::Tsv => self.to_tsv(precision),
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json_value(precision)).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

/// A labelled point for [`scatter_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub highlighted: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Static scatter chart with a log-scaled y axis; highlighted points are
/// joined by a dashed line in x order.
pub fn scatter_svg(title: &str, x_label: &str, y_label: &str, points: &[PlotPoint]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let finite: Vec<&PlotPoint> = points
        .iter()
        .filter(|p| p.x.is_finite() && p.y > 0.0)
        .collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &finite {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y.log10());
        y1 = y1.max(p.y.log10());
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{M}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{M}" y1="{M}" x2="{M}" y2="{b}" stroke="black"/>"#,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.0}</text>"#,
            sx(x),
            H - M + 15.0
        );
        let y = 10f64.powf(y0 + (y1 - y0) * i as f64 / 4.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{y:.3}</text>"#,
            M - 5.0,
            sy(y) + 4.0
        );
    }

    let mut line: Vec<&&PlotPoint> = finite.iter().filter(|p| p.highlighted).collect();
    line.sort_by(|a, b| a.x.total_cmp(&b.x));
    if line.len() > 1 {
        let path: Vec<String> = line
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.x), sy(p.y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-dasharray="6 4" stroke-width="1.5"/>"#,
            path.join(" ")
        );
    }
    for p in &finite {
        let colour = if p.highlighted { "red" } else { "steelblue" };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{colour}"><title>{} ({}, {})</title></circle>"#,
            sx(p.x),
            sy(p.y),
            escape(&p.label),
            p.x,
            p.y
        );
    }
    svg.push_str("</svg>\n");
    svg
}
