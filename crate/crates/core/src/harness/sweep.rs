//! Epsilon sweeps: parallel member runs, log-log fits and trend checks.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::config::{ScenarioConfig, ScenarioKind};
use super::run::{execute, write_artifacts, Assertion, RunStatus, RunSummary, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Relative spread allowed between consecutive epsilon ratios.
const RATIO_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub run: String,
    pub status: RunStatus,
    pub error: Option<String>,
    pub passed: bool,
    pub final_energy: Option<f64>,
    pub discrepancy_l1: Option<f64>,
    pub curvature_pairing: Option<f64>,
    pub interface_error: Option<f64>,
    pub weak_bulk_residual: Option<f64>,
    pub max_dissipation_residual: Option<f64>,
    pub closure: Option<f64>,
}

impl SweepRow {
    fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "discrepancy_l1" => self.discrepancy_l1,
            "curvature_pairing" => self.curvature_pairing,
            "interface_error" => self.interface_error,
            "weak_bulk_residual" => self.weak_bulk_residual,
            _ => None,
        }
    }
}

/// Least-squares fit `ln m = slope ln eps + intercept` with a 95% interval on
/// the slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub metric: String,
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub scenario: ScenarioKind,
    pub epsilons: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SlopeFit>,
    pub assertions: Vec<Assertion>,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == RunStatus::Completed) && self.assertions.iter().all(|a| a.passed)
    }

    pub fn fit(&self, metric: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }
}

pub fn fit_log_slope(metric: &str, eps: &[f64], values: &[f64]) -> Result<SlopeFit> {
    let n = eps.len();
    if n != values.len() || n < 3 {
        return Err(Error::Fit(format!("{metric}: need at least 3 points, got {n}")));
    }
    if values.iter().chain(eps).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Fit(format!("{metric}: logarithmic fit needs positive values")));
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit(format!("{metric}: epsilons coincide")));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = nf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Fit(e.to_string()))?.inverse_cdf(0.975);
    Ok(SlopeFit {
        metric: metric.into(),
        slope,
        intercept,
        ci_low: slope - t * se,
        ci_high: slope + t * se,
        points: n,
    })
}

/// Checks the epsilon list: at least three distinct values in geometric progression.
pub fn validate_epsilons(eps: &[f64]) -> Vec<String> {
    let mut errors = Vec::new();
    if eps.len() < 3 {
        errors.push(format!("a sweep needs at least 3 epsilons, got {}", eps.len()));
        return errors;
    }
    let mut sorted = eps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let ratios: Vec<f64> = sorted.windows(2).map(|w| w[0] / w[1]).collect();
    if ratios.iter().any(|r| !(*r > 1.0)) {
        errors.push("sweep epsilons must be distinct".into());
    } else if ratios.iter().any(|r| (r / ratios[0] - 1.0).abs() > RATIO_TOLERANCE) {
        errors.push(format!("sweep epsilons {eps:?} are not geometrically spaced"));
    }
    errors
}

fn row(epsilon: f64, run: String, outcome: &Result<RunSummary>) -> SweepRow {
    match outcome {
        Ok(s) => SweepRow {
            epsilon,
            run,
            status: s.status,
            error: s.error.clone(),
            passed: s.passed(),
            final_energy: s.metric("final_energy"),
            discrepancy_l1: s.metric("discrepancy_l1"),
            curvature_pairing: s.metric("curvature_pairing"),
            interface_error: s.metric("interface_error"),
            weak_bulk_residual: s.metric("weak_bulk_residual"),
            max_dissipation_residual: s.metric("max_dissipation_residual"),
            closure: s.metric("closure"),
        },
        Err(e) => SweepRow {
            epsilon,
            run,
            status: RunStatus::Failed,
            error: Some(e.to_string()),
            passed: false,
            final_energy: None,
            discrepancy_l1: None,
            curvature_pairing: None,
            interface_error: None,
            weak_bulk_residual: None,
            max_dissipation_residual: None,
            closure: None,
        },
    }
}

pub fn run_name(epsilon: f64) -> String {
    format!("eps_{epsilon}")
}

/// Metrics whose decay is checked for a scenario.
pub fn trend_metrics(kind: ScenarioKind) -> Vec<&'static str> {
    let mut m = vec!["discrepancy_l1", "curvature_pairing"];
    match kind {
        ScenarioKind::CircleMcf | ScenarioKind::CircleForced | ScenarioKind::DriftCircle => m.push("interface_error"),
        ScenarioKind::MsUndercooling => m.push("weak_bulk_residual"),
        _ => {}
    }
    m
}

/// Runs every epsilon in parallel. Member failures are recorded in their
/// rows and the remaining members still aggregate. With `out`, each member's
/// artifacts go to `out/eps_<epsilon>` and the report to `out/report.json`.
pub fn sweep(config: &ScenarioConfig, out: Option<&Path>) -> Result<ConvergenceReport> {
    sweep_members(config, out).map(|(report, _)| report)
}

/// As [`sweep`], also returning each member's summary in report-row order.
pub fn sweep_members(
    config: &ScenarioConfig,
    out: Option<&Path>,
) -> Result<(ConvergenceReport, Vec<Result<RunSummary>>)> {
    let mut errors = validate_epsilons(&config.epsilons);
    errors.extend(config.validate().errors);
    if !errors.is_empty() {
        return Err(Error::Config(errors));
    }
    let mut eps = config.epsilons.clone();
    eps.sort_by(|a, b| b.total_cmp(a));

    let outcomes: Vec<(f64, Result<RunSummary>)> = eps
        .par_iter()
        .map(|&e| {
            let outcome = execute(config, e).and_then(|a| {
                if let Some(dir) = out {
                    write_artifacts(&dir.join(run_name(e)), config, &a)?;
                }
                Ok(a.summary)
            });
            (e, outcome)
        })
        .collect();
    let rows: Vec<SweepRow> = outcomes.iter().map(|(e, o)| row(*e, run_name(*e), o)).collect();

    let mut fits = Vec::new();
    let mut assertions = Vec::new();
    for metric in trend_metrics(config.scenario) {
        let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.metric(metric).map(|v| (r.epsilon, v))).collect();
        if pts.len() < 3 {
            continue;
        }
        // rows run from the coarsest epsilon down: values must strictly drop
        let rises = pts.windows(2).filter(|w| !(w[1].1 < w[0].1)).count();
        assertions.push(Assertion::at_most(&format!("{metric}-decreasing"), rises as f64, 0.0, 0.0));
        let (e, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Ok(fit) = fit_log_slope(metric, &e, &v) {
            assertions.push(Assertion::at_least(&format!("{metric}-slope"), fit.slope, 0.0, 0.0));
            fits.push(fit);
        }
    }

    let report = ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        scenario: config.scenario,
        epsilons: eps,
        rows,
        fits,
        assertions,
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
        let mut f = fs::File::create(dir.join("sweep.csv"))?;
        writeln!(f, "epsilon,status,discrepancy_l1,curvature_pairing,interface_error,weak_bulk_residual")?;
        let cell = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
        for r in &report.rows {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                r.epsilon,
                if r.status == RunStatus::Completed { "completed" } else { "failed" },
                cell(r.discrepancy_l1),
                cell(r.curvature_pairing),
                cell(r.interface_error),
                cell(r.weak_bulk_residual)
            )?;
        }
    }
    Ok((report, outcomes.into_iter().map(|(_, o)| o).collect()))
}

pub fn read_report(path: &Path) -> Result<ConvergenceReport> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(Error::Schema { expected: SCHEMA_VERSION, found });
    }
    Ok(serde_json::from_value(value)?)
}
