//! Tables, checks and the files written for them.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::svg::Plot;

/// A named column with its unit, as written in the CSV header.
#[derive(Debug, Clone, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let j = self.columns.iter().position(|c| c.name == name).expect("known column");
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// How an expected value was obtained.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    ClosedForm,
    Identity,
    Derived,
    Statistical,
    Reference,
    Info,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable target, e.g. "< 1e-3".
    pub expected: String,
    pub basis: Basis,
    /// None for informational rows.
    pub pass: Option<bool>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, expected: impl Into<String>, basis: Basis, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            expected: expected.into(),
            basis,
            pass: Some(pass),
        }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected: String::new(),
            basis: Basis::Info,
            pass: None,
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub experiment: &'static str,
    pub notes: Vec<String>,
    pub table: Table,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub plot: Option<Plot>,
}

impl Artifact {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }
}

/// Run metadata repeated in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub temperature_k: f64,
    pub seed: u64,
    pub git: &'static str,
    pub version: &'static str,
}

pub fn render_csv(a: &Artifact, meta: &Meta) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# experiment: {}", a.experiment);
    let _ = writeln!(s, "# temperature_K: {}", meta.temperature_k);
    let _ = writeln!(s, "# seed: {}", meta.seed);
    let _ = writeln!(s, "# git: {}", meta.git);
    let _ = writeln!(s, "# version: {}", meta.version);
    for c in &a.checks {
        match c.pass {
            Some(p) => {
                let _ = writeln!(s, "# check: {} = {:e} (expected {}; {})", c.name, c.value, c.expected, if p { "pass" } else { "FAIL" });
            }
            None => {
                let _ = writeln!(s, "# value: {} = {:e}", c.name, c.value);
            }
        }
    }
    for n in &a.notes {
        let _ = writeln!(s, "# note: {n}");
    }
    let units: Vec<String> = a.table.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
    let _ = writeln!(s, "# units: {}", units.join(", "));
    let names: Vec<&str> = a.table.columns.iter().map(|c| c.name).collect();
    let _ = writeln!(s, "{}", names.join(","));
    for row in &a.table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

#[derive(Serialize)]
struct Report<'a> {
    meta: &'a Meta,
    #[serde(flatten)]
    artifact: &'a Artifact,
    pass: bool,
}

pub fn render_report(a: &Artifact, meta: &Meta) -> String {
    let r = Report {
        meta,
        artifact: a,
        pass: a.passed(),
    };
    serde_json::to_string_pretty(&r).expect("report is serializable") + "\n"
}

/// Writes `<experiment>.csv`, `<experiment>.report.json` and, for curves,
/// `<experiment>.svg`. Returns the paths written.
pub fn write_all(dir: &Path, a: &Artifact, meta: &Meta) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let csv = dir.join(format!("{}.csv", a.experiment));
    fs::write(&csv, render_csv(a, meta))?;
    out.push(csv);
    let json = dir.join(format!("{}.report.json", a.experiment));
    fs::write(&json, render_report(a, meta))?;
    out.push(json);
    if let Some(p) = &a.plot {
        let svg = dir.join(format!("{}.svg", a.experiment));
        fs::write(&svg, p.render())?;
        out.push(svg);
    }
    Ok(out)
}
