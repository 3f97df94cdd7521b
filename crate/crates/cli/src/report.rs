//! Report envelope and its table, JSON and CSV renderings.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{Format, RunConfig};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<tensor_flattenings::Error> for CliError {
    fn from(e: tensor_flattenings::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o: {e}"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RngInfo {
    pub generator: &'static str,
    pub seed: u64,
    /// How per-trial streams are chosen.
    pub streams: String,
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn aligned(&self) -> String {
        let mut w: Vec<usize> = self.header.iter().map(String::len).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                w[i] = w[i].max(c.chars().count());
            }
        }
        let mut s = String::new();
        let line = |s: &mut String, cells: &[String]| {
            let cells: Vec<String> =
                cells.iter().enumerate().map(|(i, c)| format!("{c:>width$}", width = w[i])).collect();
            let _ = writeln!(s, "{}", cells.join("  ").trim_end());
        };
        line(&mut s, &self.header);
        for r in &self.rows {
            line(&mut s, r);
        }
        s
    }

    fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    /// Wall-clock seconds; the only field allowed to differ between identical runs.
    pub timestamp_unix: u64,
    pub config: RunConfig,
    pub rng: Option<RngInfo>,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub result: serde_json::Value,
    #[serde(skip)]
    pub table: Table,
}

impl Report {
    pub fn new(config: RunConfig, rng: Option<RngInfo>, passed: bool, result: serde_json::Value, table: Table) -> Self {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report {
            tool: "flattenings",
            version: tensor_flattenings::VERSION,
            timestamp_unix,
            config,
            rng,
            passed,
            warnings: Vec::new(),
            result,
            table,
        }
    }

    pub fn render(&self) -> String {
        match self.config.format {
            Format::Json => serde_json::to_string_pretty(self).expect("reports serialize") + "\n",
            Format::Csv => self.table.csv(),
            Format::Table => {
                let c = &self.config;
                let verdict = if self.passed { "PASS" } else { "FAIL" };
                // freeness is purely algebraic and has no dimension or model
                let mut s = if c.n == 0 {
                    format!("{} {verdict} (k={})\n\n", c.command, c.k)
                } else {
                    format!("{} {verdict} (k={}, N={}, model={})\n\n", c.command, c.k, c.n, c.model)
                };
                s.push_str(&self.table.aligned());
                for w in &self.warnings {
                    let _ = writeln!(s, "warning: {w}");
                }
                s
            }
        }
    }
}

/// Short decimal rendering used in tables.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() >= 1e-4 && x.abs() < 1e6 {
        format!("{x:.6}")
    } else {
        format!("{x:.4e}")
    }
}
