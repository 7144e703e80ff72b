//! Scenario runner behind the `cbmlab` binary.

mod exec;
pub mod fixtures;
pub mod report;
pub mod scenario;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
pub use report::{CsvTable, Findings, Report, Status, Tolerances, Verdict};
pub use scenario::{Scenario, Task};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Multiplies every tolerance, including expectation tolerances.
    pub tol_scale: f64,
    /// Overrides the point count of the scenario grid.
    pub grid: Option<usize>,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tol_scale: 1.0,
            grid: None,
            timings: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<CsvTable>,
    pub output: scenario::Output,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Runs a scenario given as JSON text; `default_name` names the report when
/// the scenario does not.
pub fn run_text(text: &str, default_name: &str, opts: RunOptions) -> Result<Outcome> {
    let scenario = Scenario::from_json(text)?;
    let mut tols = Tolerances::new(scenario.tolerances.clone(), opts.tol_scale)?;
    let mut findings = Findings::default();
    let mut cx = exec::Context {
        tols: &mut tols,
        grid: opts.grid,
        timings: BTreeMap::new(),
    };
    exec::run_task(&scenario.task, &mut cx, &mut findings)?;
    let timings = cx.timings;

    let stray = tols.unused_overrides();
    if !stray.is_empty() {
        return Err(Error::Config(format!(
            "unknown tolerances for kind {}: {}",
            scenario.task.kind(),
            stray.join(", ")
        )));
    }
    for (name, e) in &scenario.expect {
        let v = *findings.values.get(name).ok_or_else(|| {
            Error::Config(format!("expectation names unknown value {name}"))
        })?;
        let tol = e.tol * opts.tol_scale;
        findings.check(
            &format!("expect:{name}"),
            (v - e.value).abs() <= tol,
            format!("{v:e} vs expected {:e} (tol {tol:e})", e.value),
        );
    }

    let passed = findings.verdicts.iter().all(|v| v.status != Status::Fail);
    let report = Report {
        name: scenario.name.clone().unwrap_or_else(|| default_name.to_string()),
        kind: scenario.task.kind().to_string(),
        scenario_sha256: sha256_hex(text.as_bytes()),
        inputs: serde_json::to_value(&scenario)?,
        tol_scale: opts.tol_scale,
        tolerances: tols.into_used(),
        values: findings.values,
        samples: serde_json::Value::Object(findings.samples),
        verdicts: findings.verdicts,
        passed,
        timings_ms: opts.timings.then_some(timings),
    };
    Ok(Outcome {
        report,
        csv: findings.csv,
        output: scenario.output,
    })
}

/// Runs a scenario file, or a built-in scenario named `fixture:NAME`.
pub fn run_path(source: &str, opts: RunOptions) -> Result<(Outcome, String)> {
    if let Some(name) = source.strip_prefix("fixture:") {
        let f = fixtures::find(name)
            .ok_or_else(|| Error::Config(format!("no fixture named {name}")))?;
        return Ok((run_text(f.scenario, name, opts)?, name.to_string()));
    }
    let path = Path::new(source);
    let text = fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    Ok((run_text(&text, &stem, opts)?, stem))
}

/// Writes the report and, when the scenario produced one, the scan CSV.
pub fn write_outputs(outcome: &Outcome, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report = dir.join(
        outcome
            .output
            .report
            .clone()
            .unwrap_or_else(|| format!("{stem}.report.json")),
    );
    fs::write(&report, outcome.report.to_json()?)?;
    written.push(report);
    if let Some(csv) = &outcome.csv {
        let path = dir.join(outcome.output.csv.clone().unwrap_or_else(|| format!("{stem}.csv")));
        csv.write(fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunOptions {
        RunOptions {
            timings: false,
            ..RunOptions::default()
        }
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn toy_scenario_runs() {
        let text = r#"{"kind": "toy", "a": "0", "b": "1 + t1 - t1^2", "points": [0.5],
            "grid": {"range": {"lo": 0, "hi": 1, "count": 21}},
            "expect": {"geo@0.5": {"value": 1.6, "tol": 1e-9}}}"#;
        let out = run_text(text, "toy", quick()).unwrap();
        assert!(out.report.passed, "{:#?}", out.report.verdicts);
        assert!(out.report.timings_ms.is_none());
        assert_eq!(out.csv.unwrap().rows.len(), 21);
    }

    #[test]
    fn failed_expectation_fails_report() {
        let text = r#"{"kind": "toy", "a": "0", "b": "1", "points": [0.5],
            "expect": {"geo@0.5": {"value": 1.0, "tol": 1e-9}}}"#;
        let out = run_text(text, "toy", quick()).unwrap();
        assert!(!out.report.passed);
    }

    #[test]
    fn config_errors() {
        let stray = r#"{"kind": "toy", "a": "0", "b": "1", "tolerances": {"nonsense": 1.0}}"#;
        assert!(matches!(run_text(stray, "x", quick()), Err(Error::Config(_))));
        let unknown = r#"{"kind": "toy", "a": "0", "b": "1", "expect": {"nope": {"value": 0, "tol": 1}}}"#;
        assert!(matches!(run_text(unknown, "x", quick()), Err(Error::Config(_))));
        assert!(run_path("fixture:does-not-exist", quick()).is_err());
    }
}
