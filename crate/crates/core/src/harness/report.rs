use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};

/// Whether a check's constant is exactly 1 or an empirical corpus band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    Exact,
    Banded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRatio {
    pub case: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub coarse: f64,
    pub fine: f64,
    pub relative_change: f64,
    pub limit: f64,
}

impl Refinement {
    pub fn new(coarse: f64, fine: f64, limit: f64) -> Self {
        let relative_change = if coarse == fine { 0.0 } else { (fine - coarse).abs() / coarse.abs().max(f64::MIN_POSITIVE) };
        Refinement { coarse, fine, relative_change, limit }
    }

    pub fn ok(&self) -> bool {
        self.relative_change <= self.limit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub class: CheckClass,
    /// The inequality being measured, `ratio = lhs / rhs ≤ bound`.
    pub direction: String,
    pub bound: f64,
    pub empirical_constant: f64,
    pub ratios: Vec<CaseRatio>,
    /// Secondary constants (parameter sweeps, per-level maxima).
    pub sweep: Vec<CaseRatio>,
    /// Extra conditions that must hold, with their outcome.
    pub conditions: Vec<(String, bool)>,
    pub refinement: Option<Refinement>,
    pub notes: Vec<String>,
    pub params: serde_json::Value,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(check_id: &str, class: CheckClass, direction: &str, bound: f64) -> Self {
        CheckReport {
            check_id: check_id.to_string(),
            class,
            direction: direction.to_string(),
            bound,
            empirical_constant: 0.0,
            ratios: vec![],
            sweep: vec![],
            conditions: vec![],
            refinement: None,
            notes: vec![],
            params: serde_json::Value::Null,
            pass: false,
        }
    }

    pub fn push(&mut self, case: impl Into<String>, ratio: f64) {
        self.ratios.push(CaseRatio { case: case.into(), ratio });
    }

    pub fn push_sweep(&mut self, case: impl Into<String>, ratio: f64) {
        self.sweep.push(CaseRatio { case: case.into(), ratio });
    }

    pub fn condition(&mut self, what: impl Into<String>, ok: bool) {
        self.conditions.push((what.into(), ok));
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Largest ratio; NaN if any ratio is NaN.
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().map(|r| r.ratio).fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
    }

    /// Fixes the constant and the verdict: every ratio finite and within the
    /// bound, every extra condition true, refinement within its limit.
    pub fn finish(mut self) -> Self {
        self.empirical_constant = self.max_ratio();
        let ratios_ok = !self.ratios.is_empty() && self.ratios.iter().all(|r| r.ratio.is_finite() && r.ratio <= self.bound);
        let refine_ok = self.refinement.as_ref().is_none_or(Refinement::ok);
        self.pass = ratios_ok && refine_ok && self.conditions.iter().all(|(_, ok)| *ok);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<'a> {
    pub generated_unix: u64,
    pub reports: &'a [CheckReport],
}

/// Deterministic JSON payload (no timestamp).
pub fn payload_json(reports: &[CheckReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

pub fn ratios_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check_id", "kind", "case", "ratio", "bound", "pass"]).map_err(csv_err)?;
    for r in reports {
        let rows = r.ratios.iter().map(|c| ("ratio", c)).chain(r.sweep.iter().map(|c| ("sweep", c)));
        for (kind, c) in rows {
            w.write_record([&r.check_id, kind, &c.case, &format!("{:e}", c.ratio), &format!("{:e}", r.bound), &r.pass.to_string()])
                .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

/// Writes `report.json` and `ratios.csv` into `dir`; returns both paths.
pub fn emit_report(reports: &[CheckReport], dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let generated_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let json = dir.join("report.json");
    let csv = dir.join("ratios.csv");
    std::fs::write(&json, serde_json::to_string_pretty(&ReportFile { generated_unix, reports })? + "\n")?;
    std::fs::write(&csv, ratios_csv(reports)?)?;
    Ok((json, csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CheckReport {
        let mut r = CheckReport::new("demo", CheckClass::Banded, "a ≤ c b", 10.0);
        r.push("case0", 1.5);
        r.push("case1", 2.5);
        r.finish()
    }

    #[test]
    fn verdicts() {
        let r = sample();
        assert!(r.pass);
        assert_eq!(r.empirical_constant, 2.5);
        let mut bad = CheckReport::new("x", CheckClass::Exact, "", 1.0);
        bad.push("c", f64::INFINITY);
        assert!(!bad.finish().pass);
        assert!(!CheckReport::new("empty", CheckClass::Exact, "", 1.0).finish().pass);
        let mut r = sample();
        r.refinement = Some(Refinement::new(2.0, 3.0, 0.2));
        assert!(!r.finish().pass);
        let mut r = sample();
        r.condition("lower bound", false);
        assert!(!r.finish().pass);
    }

    #[test]
    fn empty_and_single_reports() {
        let dir = tempfile::tempdir().unwrap();
        let (j, c) = emit_report(&[], dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 0);
        assert_eq!(std::fs::read_to_string(c).unwrap().lines().count(), 1);
        let (j, c) = emit_report(&[sample()], dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        assert_eq!(v["reports"].as_array().unwrap().len(), 1);
        assert!(v["generated_unix"].as_u64().is_some());
        let text = std::fs::read_to_string(c).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().skip(1).all(|l| l.starts_with("demo,ratio,")));
    }
}
