//! Report rows, the CSV table and the JSON summary.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::LabError;

/// Where the reference value of a row comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A closed form or inequality stated by the theory under test.
    Theorem,
    /// Holds by construction or by definition.
    Trivial,
    /// An independent computation inside this crate.
    Derived,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Theorem => "theorem",
            Provenance::Trivial => "trivial",
            Provenance::Derived => "derived",
        }
    }
}

/// One check at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub check: &'static str,
    pub k: Option<u64>,
    pub l: Option<u64>,
    /// Degree `q`, derivative order, spectrum or complex number.
    pub index: Option<u64>,
    /// Polynomial degree, radius, `μ` or grid size.
    pub param: Option<f64>,
    pub measured: f64,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub warning: Option<String>,
    pub provenance: Provenance,
}

impl ReportRow {
    pub fn new(scenario: &str, check: &'static str, provenance: Provenance) -> Self {
        ReportRow {
            scenario: scenario.to_string(),
            check,
            k: None,
            l: None,
            index: None,
            param: None,
            measured: f64::NAN,
            reference: None,
            tolerance: None,
            pass: false,
            warning: None,
            provenance,
        }
    }

    pub fn at(mut self, k: u64, l: u64) -> Self {
        self.k = Some(k);
        self.l = Some(l);
        self
    }

    pub fn index(mut self, i: usize) -> Self {
        self.index = Some(i as u64);
        self
    }

    pub fn param(mut self, p: f64) -> Self {
        self.param = Some(p);
        self
    }

    pub fn measured(mut self, v: f64) -> Self {
        self.measured = v;
        self
    }

    pub fn reference(mut self, v: f64) -> Self {
        self.reference = Some(v);
        self
    }

    pub fn tolerance(mut self, v: f64) -> Self {
        self.tolerance = Some(v);
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.pass = ok;
        self
    }

    pub fn warn(mut self, w: Option<String>) -> Self {
        self.warning = w;
        self
    }

    /// Pass flag with warnings promoted to failures when `strict`.
    pub fn passed(&self, strict: bool) -> bool {
        self.pass && !(strict && self.warning.is_some())
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        (&self.scenario, self.check, self.k, self.l, self.index)
            .cmp(&(&other.scenario, other.check, other.k, other.l, other.index))
            .then_with(|| match (self.param, other.param) {
                (Some(a), Some(b)) => a.total_cmp(&b),
                (a, b) => a.is_some().cmp(&b.is_some()),
            })
    }
}

pub const COLUMNS: [&str; 12] = [
    "scenario",
    "check",
    "k",
    "l",
    "index",
    "param",
    "measured",
    "reference",
    "tolerance",
    "pass",
    "warning",
    "provenance",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckCounts {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub scenarios: Vec<String>,
    pub strict: bool,
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub warnings: usize,
    pub checks: BTreeMap<String, CheckCounts>,
    pub status: &'static str,
}

/// All rows of a run, in canonical order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(ReportRow::key_cmp);
        Report { rows }
    }

    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn all_passed(&self, strict: bool) -> bool {
        self.rows.iter().all(|r| r.passed(strict))
    }

    pub fn to_csv(&self) -> Result<String, LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.scenario.clone(),
                r.check.to_string(),
                opt(r.k, |v| v.to_string()),
                opt(r.l, |v| v.to_string()),
                opt(r.index, |v| v.to_string()),
                opt(r.param, format_float),
                format_float(r.measured),
                opt(r.reference, format_float),
                opt(r.tolerance, format_float),
                r.pass.to_string(),
                r.warning.clone().unwrap_or_default(),
                r.provenance.as_str().to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn summary(&self, strict: bool) -> Summary {
        let mut checks: BTreeMap<String, CheckCounts> = BTreeMap::new();
        let mut scenarios: Vec<String> = self.rows.iter().map(|r| r.scenario.clone()).collect();
        scenarios.dedup();
        for r in &self.rows {
            let c = checks.entry(format!("{}/{}", r.scenario, r.check)).or_default();
            c.rows += 1;
            if r.passed(strict) {
                c.passed += 1;
            } else {
                c.failed += 1;
            }
            c.warnings += r.warning.is_some() as usize;
        }
        let passed = self.rows.iter().filter(|r| r.passed(strict)).count();
        Summary {
            scenarios,
            strict,
            rows: self.rows.len(),
            passed,
            failed: self.rows.len() - passed,
            warnings: self.rows.iter().filter(|r| r.warning.is_some()).count(),
            checks,
            status: if passed == self.rows.len() { "pass" } else { "fail" },
        }
    }

    /// Writes `report.csv` and `summary.json` into `dir`, creating it.
    pub fn write(&self, dir: &Path, strict: bool) -> Result<(), LabError> {
        let csv = self.to_csv()?;
        let mut json = serde_json::to_string_pretty(&self.summary(strict)).expect("summary serializes");
        json.push('\n');
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), csv)?;
        fs::write(dir.join("summary.json"), json)?;
        Ok(())
    }
}
