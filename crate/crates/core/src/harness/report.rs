//! Merges run and sweep artifacts into tables, plot data and a verdict.
//!
//! Outputs under the report directory:
//!
//! - `merged.csv`: every diagnostics row, prefixed by `run,epsilon`.
//! - `<run>.dat`: whitespace-separated diagnostics per run for gnuplot; the
//!   first line is a `#` comment naming the columns, empty cells become `NaN`.
//! - `verdict.json`: per-run outcomes, sweep fits and assertions.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{read_summary, Assertion, RunStatus, SCHEMA_VERSION};
use super::sweep::{read_report, SlopeFit};
use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub name: String,
    pub scenario: String,
    pub epsilon: f64,
    pub status: RunStatus,
    pub passed: bool,
    pub failed_assertions: Vec<String>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema_version: u32,
    pub runs: Vec<RunVerdict>,
    pub fits: Vec<SlopeFit>,
    pub sweep_assertions: Vec<Assertion>,
    pub all_passed: bool,
}

fn dir_name(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Expands sweep directories into their member runs.
fn collect_runs(inputs: &[PathBuf], fits: &mut Vec<SlopeFit>, sweep_asserts: &mut Vec<Assertion>) -> Result<Vec<(String, PathBuf)>> {
    let mut runs = Vec::new();
    for input in inputs {
        if input.join("summary.json").is_file() {
            runs.push((dir_name(input), input.clone()));
        } else if input.join("report.json").is_file() {
            let report = read_report(&input.join("report.json"))?;
            fits.extend(report.fits.iter().cloned());
            sweep_asserts.extend(report.assertions.iter().cloned());
            for row in &report.rows {
                let dir = input.join(&row.run);
                if dir.join("summary.json").is_file() {
                    runs.push((format!("{}/{}", dir_name(input), row.run), dir));
                }
            }
        } else {
            return Err(Error::Usage(format!(
                "{} holds neither summary.json nor report.json",
                input.display()
            )));
        }
    }
    Ok(runs)
}

fn expected_header() -> String {
    DiagnosticsRecord::csv_header()
}

pub fn report(inputs: &[PathBuf], out: &Path) -> Result<Verdict> {
    if inputs.is_empty() {
        return Err(Error::Usage("report needs at least one run or sweep directory".into()));
    }
    let mut fits = Vec::new();
    let mut sweep_assertions = Vec::new();
    let runs = collect_runs(inputs, &mut fits, &mut sweep_assertions)?;
    if runs.is_empty() {
        return Err(Error::Usage("no run artifacts found".into()));
    }
    fs::create_dir_all(out)?;
    let header = expected_header();
    let columns: Vec<&str> = header.split(',').collect();
    let mut merged = fs::File::create(out.join("merged.csv"))?;
    writeln!(merged, "run,epsilon,{header}")?;
    let mut verdicts = Vec::new();
    for (k, (name, dir)) in runs.iter().enumerate() {
        let summary = read_summary(&dir.join("summary.json"))?;
        let csv = fs::read_to_string(dir.join("diagnostics.csv"))?;
        let mut lines = csv.lines();
        let found = lines.next().unwrap_or("");
        if found != header {
            return Err(Error::Usage(format!("{}: diagnostics columns differ from this version", dir.display())));
        }
        let stem = format!("{k:02}_{}", name.replace('/', "_"));
        let mut dat = fs::File::create(out.join(format!("{stem}.dat")))?;
        writeln!(dat, "# {}", columns.join(" "))?;
        let mut rows = 0;
        for line in lines.filter(|l| !l.is_empty()) {
            writeln!(merged, "{name},{},{line}", summary.epsilon)?;
            let cells: Vec<&str> = line.split(',').map(|c| if c.is_empty() { "NaN" } else { c }).collect();
            writeln!(dat, "{}", cells.join(" "))?;
            rows += 1;
        }
        verdicts.push(RunVerdict {
            name: name.clone(),
            scenario: summary.scenario.name().into(),
            epsilon: summary.epsilon,
            status: summary.status,
            passed: summary.passed(),
            failed_assertions: summary.failed_assertions(),
            rows,
        });
    }
    let all_passed = verdicts.iter().all(|v| v.passed) && sweep_assertions.iter().all(|a| a.passed);
    let verdict = Verdict { schema_version: SCHEMA_VERSION, runs: verdicts, fits, sweep_assertions, all_passed };
    fs::write(out.join("verdict.json"), serde_json::to_string_pretty(&verdict)? + "\n")?;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(report(&[], dir.path()), Err(Error::Usage(_))));
        assert!(matches!(report(&[dir.path().to_path_buf()], &dir.path().join("r")), Err(Error::Usage(_))));
    }
}
