//! Report assembly and deterministic rendering.
//!
//! Every report carries the seed, the tolerance set, the toolkit version,
//! and the exact command line. CSV output prints floats with 17 significant
//! digits behind `#`-prefixed metadata lines; JSON output is
//! field-order-stable. Identical configurations therefore produce
//! byte-identical files.

use serde::Serialize;
use teledense::Tolerances;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

/// 17 significant digits: enough for exact `f64` round-trips, stable to
/// diff.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub command_line: String,
    pub version: String,
    pub seed: u64,
    pub tolerances: Vec<(String, f64)>,
}

impl ReportMeta {
    pub fn new(command_line: String, seed: u64, tol: &Tolerances) -> Self {
        Self {
            command_line,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            tolerances: tol
                .entries()
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub meta: ReportMeta,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(meta: ReportMeta, columns: Vec<&'static str>) -> Self {
        Self {
            meta,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", self.meta.command_line));
        out.push_str(&format!("# version: {}\n", self.meta.version));
        out.push_str(&format!("# seed: {}\n", self.meta.seed));
        for (k, v) in &self.meta.tolerances {
            out.push_str(&format!("# tol_{k}: {}\n", fmt_f64(*v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::F(v) => fmt_f64(*v),
                    Cell::I(v) => v.to_string(),
                    Cell::S(s) => s.clone(),
                    Cell::B(b) => b.to_string(),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        use serde_json::{json, Value};
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::F(v) => json!(v),
                        Cell::I(v) => json!(v),
                        Cell::S(s) => json!(s),
                        Cell::B(b) => json!(b),
                        Cell::Empty => Value::Null,
                    })
                    .collect()
            })
            .collect();
        let doc = json!({
            "meta": {
                "command_line": self.meta.command_line,
                "version": self.meta.version,
                "seed": self.meta.seed,
                "tolerances": self.meta.tolerances,
            },
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("report serialization") + "\n"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_has_17_significant_digits() {
        let s = fmt_f64(1.0 / 3.0);
        assert_eq!(s, "3.3333333333333331e-1");
        let v: f64 = s.parse().unwrap();
        assert_eq!(v, 1.0 / 3.0);
    }

    #[test]
    fn csv_rendering_is_stable() {
        let meta = ReportMeta::new("teledense test".into(), 7, &Tolerances::default());
        let mut r = Report::new(meta, vec!["a", "b"]);
        r.push(vec![Cell::F(0.5), Cell::S("x".into())]);
        let once = r.to_csv();
        let twice = r.to_csv();
        assert_eq!(once, twice);
        assert!(once.contains("# seed: 7"));
        assert!(once.contains("a,b"));
    }
}
