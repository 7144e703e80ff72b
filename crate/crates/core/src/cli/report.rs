use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check's precondition does not hold; recorded, not counted.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Named tolerances with scenario overrides and a global scale; every value
/// handed out is recorded for the report.
#[derive(Debug, Clone)]
pub struct Tolerances {
    overrides: BTreeMap<String, f64>,
    scale: f64,
    used: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn new(overrides: BTreeMap<String, f64>, scale: f64) -> Result<Tolerances> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Config(format!("tolerance scale must be positive, got {scale}")));
        }
        Ok(Tolerances {
            overrides,
            scale,
            used: BTreeMap::new(),
        })
    }

    pub fn get(&mut self, name: &str, default: f64) -> f64 {
        let v = self.overrides.get(name).copied().unwrap_or(default) * self.scale;
        self.used.insert(name.to_string(), v);
        v
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Overrides naming no tolerance of the scenario kind.
    pub fn unused_overrides(&self) -> Vec<String> {
        self.overrides
            .keys()
            .filter(|k| !self.used.contains_key(*k))
            .cloned()
            .collect()
    }

    pub fn into_used(self) -> BTreeMap<String, f64> {
        self.used
    }
}

/// A scan dump: coordinate columns first, header mandatory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> CsvTable {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush().map_err(Error::Io)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub kind: String,
    pub scenario_sha256: String,
    /// The scenario as parsed, defaults filled in.
    pub inputs: serde_json::Value,
    pub tol_scale: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub values: BTreeMap<String, f64>,
    pub samples: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Accumulates values and verdicts while a scenario runs.
#[derive(Debug, Default)]
pub struct Findings {
    pub values: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub samples: serde_json::Map<String, serde_json::Value>,
    pub csv: Option<CsvTable>,
}

impl Findings {
    pub fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.insert(name.into(), v);
    }

    pub fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        });
    }

    pub fn skip(&mut self, name: &str, detail: String) {
        self.verdicts.push(Verdict {
            name: name.to_string(),
            status: Status::Skipped,
            detail,
        });
    }

    pub fn sample<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        self.samples.insert(name.to_string(), serde_json::to_value(v)?);
        Ok(())
    }
}
