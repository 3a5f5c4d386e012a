//! Check records, reports and their JSON / CSV / plot-data emitters.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

/// How `measured` is compared with `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Equal,
}

impl Comparison {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
            Comparison::Above => measured > threshold,
            Comparison::Equal => measured == threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Above => ">",
            Comparison::Equal => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Statement the check exercises, or `"plumbing"`.
    pub anchor: String,
    pub inputs_digest: String,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub comparison: Comparison,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// First 16 hex digits of the SHA-256 of the JSON encoding of `inputs`.
pub fn digest<T: Serialize + ?Sized>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    let h = Sha256::digest(&bytes);
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Check {
    pub fn measure<T: Serialize + ?Sized>(
        name: impl Into<String>,
        anchor: &str,
        inputs: &T,
        measured: f64,
        threshold: f64,
        comparison: Comparison,
    ) -> Self {
        let ok = comparison.holds(measured, threshold);
        Check {
            name: name.into(),
            anchor: anchor.into(),
            inputs_digest: digest(inputs),
            measured: finite(measured),
            threshold: finite(threshold),
            comparison,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            note: (!measured.is_finite()).then(|| format!("measured value {measured}")),
        }
    }

    /// A boolean property; measured is 1 when it holds.
    pub fn holds<T: Serialize + ?Sized>(name: impl Into<String>, anchor: &str, inputs: &T, ok: bool) -> Self {
        Self::measure(name, anchor, inputs, if ok { 1.0 } else { 0.0 }, 1.0, Comparison::Equal)
    }

    pub fn skip<T: Serialize + ?Sized>(name: impl Into<String>, anchor: &str, inputs: &T, reason: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            inputs_digest: digest(inputs),
            measured: None,
            threshold: None,
            comparison: Comparison::AtMost,
            verdict: Verdict::Skip,
            note: Some(reason.into()),
        }
    }

    pub fn error<T: Serialize + ?Sized>(name: impl Into<String>, anchor: &str, inputs: &T, err: impl std::fmt::Display) -> Self {
        Check {
            verdict: Verdict::Fail,
            note: Some(err.to_string()),
            ..Self::skip(name, anchor, inputs, "")
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A table for external plotting; undefined cells are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Series {
    /// Non-finite values become empty cells.
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Series {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: rows.into_iter().map(|r| r.into_iter().map(finite).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvStamp {
    pub crate_version: String,
    pub os: String,
    pub arch: String,
    pub workers: usize,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub generated_unix: u64,
}

impl EnvStamp {
    pub fn now(workers: usize) -> Self {
        EnvStamp {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            workers,
            generated_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    PlotData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite_id: String,
    pub config_digest: String,
    pub checks: Vec<Check>,
    pub series: BTreeMap<String, Series>,
    pub env: EnvStamp,
}

impl Report {
    pub fn new(suite_id: impl Into<String>, config_digest: String, workers: usize) -> Self {
        Report { suite_id: suite_id.into(), config_digest, checks: Vec::new(), series: BTreeMap::new(), env: EnvStamp::now(workers) }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.checks.iter().filter(|c| c.verdict == v).count()
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "anchor", "inputs_digest", "measured", "comparison", "threshold", "verdict", "note"])?;
        let num = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for c in &self.checks {
            let verdict = serde_json::to_value(c.verdict)?.as_str().unwrap_or_default().to_string();
            w.write_record([
                c.name.as_str(),
                c.anchor.as_str(),
                c.inputs_digest.as_str(),
                &num(c.measured),
                c.comparison.symbol(),
                &num(c.threshold),
                &verdict,
                c.note.as_deref().unwrap_or(""),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    /// Human summary, one line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let v = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Skip => "SKIP",
            };
            let m = c.measured.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
            let t = c.threshold.map(|x| format!("{x:.2e}")).unwrap_or_else(|| "-".into());
            s += &format!("{v} {:<44} {m} {} {t}", c.name, c.comparison.symbol());
            if let Some(n) = &c.note {
                s += &format!("  ({n})");
            }
            s.push('\n');
        }
        s += &format!(
            "{}: {} passed, {} failed, {} skipped\n",
            self.suite_id,
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Skip)
        );
        s
    }

    /// Write the report into `dir`; returns the files written.
    pub fn emit(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let p = dir.join("report.json");
                fs::write(&p, self.to_json()?)?;
                written.push(p);
            }
            Format::Csv => {
                let p = dir.join("report.csv");
                fs::write(&p, self.to_csv()?)?;
                written.push(p);
            }
            Format::PlotData => {
                for (name, s) in &self.series {
                    let p = dir.join(format!("{name}.csv"));
                    fs::write(&p, series_csv(s)?)?;
                    written.push(p);
                }
            }
        }
        Ok(written)
    }
}

pub fn series_csv(s: &Series) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&s.columns)?;
    for r in &s.rows {
        w.write_record(r.iter().map(|v| v.map(|x| format!("{x:e}")).unwrap_or_default()))?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("t", digest(&1), 0);
        r.checks.push(Check::measure("a", "plumbing", &[1, 2], 1e-5, 1e-3, Comparison::AtMost));
        r.checks.push(Check::measure("b", "plumbing", &"x", 0.5, 1e-3, Comparison::Above));
        r.checks.push(Check::skip("c", "plumbing", &(), "boundary"));
        r.series.insert("s".into(), Series::new(&["m", "remainder"], vec![vec![1.0, 0.25], vec![2.0, f64::NAN]]));
        r
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(Report::from_json(&r.to_json().unwrap()).unwrap(), r);
        assert!(r.passed());
    }

    #[test]
    fn verdicts_and_csv() {
        let c = Check::measure("x", "plumbing", &0, f64::NAN, 1.0, Comparison::AtMost);
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.measured, None);
        let csv = sample().to_csv().unwrap();
        assert!(csv.starts_with("name,anchor,inputs_digest,measured,comparison,threshold,verdict,note\n"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(series_csv(&sample().series["s"]).unwrap(), "m,remainder\n1e0,2.5e-1\n2e0,\n");
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&[1, 2, 3]), digest(&vec![1, 2, 3]));
        assert_ne!(digest(&[1, 2, 3]), digest(&[1, 2, 4]));
        assert_eq!(digest(&()).len(), 16);
    }
}
