//! Single `(scenario, epsilon)` runs and their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{GeometrySection, ScenarioConfig, ScenarioKind};
use crate::coupled::{free_energy, grain_phase_bound, grain_step, ms_energy_identity, ms_step, GrainState, MsState};
use crate::diagnostics::{DiagnosticsRecord, Monitor, TestFunctionBattery};
use crate::error::{Error, Result};
use crate::forcing::{ForcingAux, ForcingSpec};
use crate::grid::{Grid, Point, ScalarField};
use crate::linalg::CgSettings;
use crate::potential::{c0, well_prepared_initial, ProfileSpec};
use crate::sharp::{extract_interface, front_speed, interface_metrics, InterfaceCurve, RadialValue};
use crate::snapshot::Snapshot;
use crate::solver::{SolverState, StepOutcome, Stepper};

pub const SCHEMA_VERSION: u32 = 1;

/// Radii below this are too small for the tracking assertion.
pub const RADIUS_FLOOR: f64 = 0.1;

const HOLDER_FRAMES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

/// A named check: `measured relation bound`, allowing `tolerance` of slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub bound: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn at_most(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        let passed = measured <= bound + tolerance;
        Self { name: name.into(), measured, relation: Relation::AtMost, bound, tolerance, passed }
    }

    pub fn at_least(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        let passed = measured >= bound - tolerance;
        Self { name: name.into(), measured, relation: Relation::AtLeast, bound, tolerance, passed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: ScenarioKind,
    pub dim: usize,
    pub cells: Vec<usize>,
    pub epsilon: f64,
    pub dt: f64,
    pub steps: u64,
    pub horizon: f64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub warnings: Vec<String>,
    pub final_record: Option<DiagnosticsRecord>,
    pub metrics: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Completed && self.assertions.iter().all(|a| a.passed)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn failed_assertions(&self) -> Vec<String> {
        self.assertions.iter().filter(|a| !a.passed).map(|a| a.name.clone()).collect()
    }
}

/// One interface point at an output time; `component` numbers polylines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSample {
    pub t: f64,
    pub component: usize,
    pub point: Point,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub interfaces: Vec<InterfaceSample>,
    /// File stem and contents.
    pub snapshots: Vec<(String, Snapshot)>,
}

enum Model {
    Phase(SolverState),
    Ms(MsState),
    Grain(GrainState),
}

impl Model {
    fn phase(&self) -> &SolverState {
        match self {
            Model::Phase(s) => s,
            Model::Ms(s) => &s.phase,
            Model::Grain(s) => &s.phase,
        }
    }

    fn bulk(&self) -> Option<(&'static str, &ScalarField)> {
        match self {
            Model::Phase(_) => None,
            Model::Ms(s) => Some(("theta", &s.theta)),
            Model::Grain(s) => Some(("c", &s.c)),
        }
    }

    fn advance(&self, stepper: &Stepper, forcing: &ForcingSpec) -> Result<(Model, StepOutcome)> {
        match self {
            Model::Phase(s) => {
                let out = stepper.step(s, forcing, ForcingAux::default())?;
                Ok((Model::Phase(out.state.clone()), out))
            }
            Model::Ms(s) => ms_step(stepper, s).map(|(n, o)| (Model::Ms(n), o)),
            Model::Grain(s) => grain_step(stepper, s, CgSettings::default()).map(|(n, o)| (Model::Grain(n), o)),
        }
    }
}

fn bulk_field(config: &ScenarioConfig, grid: &Grid) -> ScalarField {
    let c = &config.coupling;
    match (c.width, &c.center) {
        (Some(w), Some(center)) => {
            let dim = grid.dim();
            let center = center.clone();
            ScalarField::from_fn(*grid, move |x| {
                let d2: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>() / (w * w);
                if d2 < 1.0 {
                    c.amplitude * (1.0 - 1.0 / (1.0 - d2)).exp()
                } else {
                    0.0
                }
            })
        }
        _ => ScalarField::constant(*grid, c.amplitude),
    }
}

/// Tracks the scenario-specific quantities sampled at output times.
#[derive(Default)]
struct Tracker {
    radius_error: f64,
    radius_checked: usize,
    first_radius: Option<f64>,
    last_seen: Option<f64>,
    vanished_at: Option<f64>,
    front: Vec<(f64, f64)>,
    front_origin: Option<f64>,
    front_drift: f64,
    center: Option<Point>,
    max_ms_identity: f64,
    max_conservation: f64,
    max_density_ratio: f64,
    max_mass_drift: f64,
    max_bulk_sup: f64,
}

/// Executes one run in memory. Configuration errors are returned as
/// `Error::Config`; failures during stepping end the run with status `failed`
/// and everything recorded up to that point.
pub fn execute(config: &ScenarioConfig, epsilon: f64) -> Result<RunArtifacts> {
    let config = config.with_epsilon(epsilon);
    let warnings = config.check()?;
    let grid = config.grid()?;
    let eps = epsilon;
    let stepper = Stepper::new(&grid, eps, config.stepper.config())?;
    let dt = stepper.dt();
    let forcing = config.forcing_spec();
    let geometry = config.geometry.geometry();
    let u0 = well_prepared_initial(&ProfileSpec { epsilon: eps, geometry }, &grid)?;
    let phase = stepper.initial_state(u0);
    let mut model = match config.scenario {
        ScenarioKind::MsUndercooling => Model::Ms(MsState::new(phase, bulk_field(&config, &grid))?),
        ScenarioKind::GrainBoundary => {
            Model::Grain(GrainState::new(phase, bulk_field(&config, &grid), config.coupling.mobility_floor)?)
        }
        _ => Model::Phase(phase),
    };
    let initial_ms = match &model {
        Model::Ms(s) => Some(s.clone()),
        _ => None,
    };
    let initial_mass = match &model {
        Model::Grain(s) => Some((s.mass(), s.c.l1_norm())),
        _ => None,
    };
    let f0 = match &model {
        Model::Grain(s) => Some(free_energy(&s.phase.u, &s.c, eps)),
        _ => None,
    };

    let battery = TestFunctionBattery::seeded(&grid, config.horizon, config.seed, config.battery_size);
    let mut monitor = Monitor::new(model.phase(), Some(battery));
    let oracle = config.radial_oracle();
    let n_steps = ((config.horizon / dt) - 1e-9).ceil().max(1.0) as u64;
    let every = ((config.output_interval / dt).round() as u64).clamp(1, n_steps);
    let n_records = n_steps / every + 1;
    let holder_stride = n_records.div_ceil(HOLDER_FRAMES as u64).max(1);

    let mut tracker = Tracker { max_bulk_sup: model.bulk().map_or(0.0, |(_, f)| f.max_abs()), ..Default::default() };
    let mut records = Vec::new();
    let mut interfaces = Vec::new();
    let mut snapshots = Vec::new();
    let mut pending_snaps: Vec<f64> = config.snapshot_times.clone();
    pending_snaps.sort_by(f64::total_cmp);
    let mut free_energy_violation: f64 = 0.0;
    let mut last_free = f0;
    let mut error = None;

    let observe_record = |model: &Model,
                              monitor: &Monitor,
                              tracker: &mut Tracker,
                              records: &mut Vec<DiagnosticsRecord>,
                              interfaces: &mut Vec<InterfaceSample>| {
        let state = model.phase();
        let mut rec = monitor.record(state);
        let curve = extract_interface(&state.u);
        match &curve {
            InterfaceCurve::Polylines(lines) => {
                for (k, line) in lines.iter().enumerate() {
                    for p in &line.points {
                        interfaces.push(InterfaceSample { t: state.t, component: k, point: [p[0], p[1], 0.0] });
                    }
                }
            }
            InterfaceCurve::Points(pts) => {
                interfaces.extend(pts.iter().map(|&point| InterfaceSample { t: state.t, component: 0, point }));
            }
        }
        let metrics = interface_metrics(&curve, grid.dim()).ok();
        match &config.geometry {
            GeometrySection::Ball { .. } => {
                if let Some(m) = &metrics {
                    rec.radius = m.radius;
                    tracker.center = m.center;
                    tracker.last_seen = Some(state.t);
                } else if tracker.vanished_at.is_none() && tracker.last_seen.is_some() {
                    tracker.vanished_at = Some(state.t);
                }
                if let (Some(r), Some(oracle)) = (rec.radius, &oracle) {
                    tracker.first_radius.get_or_insert(r);
                    if let RadialValue::Radius(exact) = oracle.radius_at(state.t) {
                        if exact >= RADIUS_FLOOR {
                            tracker.radius_error = tracker.radius_error.max((r - exact).abs() / exact);
                            tracker.radius_checked += 1;
                        }
                    }
                }
            }
            GeometrySection::Plane { point, normal } => {
                if let Some(m) = &metrics {
                    let dim = grid.dim();
                    let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let s: f64 = (0..dim).map(|a| (m.centroid[a] - point[a]) * normal[a] / norm).sum();
                    let origin = *tracker.front_origin.get_or_insert(s);
                    tracker.front_drift = tracker.front_drift.max((s - origin).abs());
                    tracker.front.push((state.t, -s));
                }
            }
        }
        match model {
            Model::Ms(s) => {
                let init = initial_ms.as_ref().expect("coupled run keeps its initial state");
                let c = s.conserved();
                let c_init = init.conserved();
                let scale = if c_init.abs() > 0.0 { c_init.abs() } else { 1.0 };
                tracker.max_conservation = tracker.max_conservation.max((c - c_init).abs() / scale);
                let id = ms_energy_identity(init, s);
                tracker.max_ms_identity = tracker.max_ms_identity.max(id);
                rec.conserved = Some(c);
                rec.ms_identity = Some(id);
            }
            Model::Grain(s) => {
                let (m0, l1) = initial_mass.expect("grain run keeps its initial mass");
                let m = s.mass();
                let scale = m0.abs().max(l1).max(f64::MIN_POSITIVE);
                tracker.max_mass_drift = tracker.max_mass_drift.max((m - m0).abs() / scale);
                rec.mass = Some(m);
                rec.free_energy = Some(free_energy(&s.phase.u, &s.c, eps));
            }
            Model::Phase(_) => {}
        }
        tracker.max_density_ratio = tracker.max_density_ratio.max(rec.density_ratio);
        records.push(rec);
    };

    let take_snapshots = |model: &Model, pending: &mut Vec<f64>, snaps: &mut Vec<(String, Snapshot)>| {
        let state = model.phase();
        while let Some(&ts) = pending.first() {
            if state.t + 0.5 * dt < ts {
                break;
            }
            pending.remove(0);
            let k = snaps.iter().filter(|(n, _)| n.starts_with("u_")).count();
            let snap = |field: &ScalarField| Snapshot { time: state.t, epsilon: eps, field: field.clone() };
            snaps.push((format!("u_{k:04}"), snap(&state.u)));
            if let Some((name, field)) = model.bulk() {
                snaps.push((format!("{name}_{k:04}"), snap(field)));
            }
        }
    };

    take_snapshots(&model, &mut pending_snaps, &mut snapshots);
    observe_record(&model, &monitor, &mut tracker, &mut records, &mut interfaces);
    for k in 1..=n_steps {
        let before = model.phase().clone();
        let (next, out) = match model.advance(&stepper, &forcing) {
            Ok(v) => v,
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        };
        let theta = match (&model, &next) {
            (Model::Ms(a), Model::Ms(b)) => Some((a.theta.clone(), b.theta.clone())),
            _ => None,
        };
        let check = monitor.observe(&before, &out, theta.as_ref().map(|(a, b)| (a, b)));
        if !check.energy.is_finite() {
            error = Some(Error::NonFinite { t: out.state.t }.to_string());
            break;
        }
        if let Model::Grain(g) = &next {
            let f = free_energy(&g.phase.u, &g.c, eps);
            if let Some(prev) = last_free {
                free_energy_violation = free_energy_violation.max(f - prev);
            }
            last_free = Some(f);
            tracker.max_bulk_sup = tracker.max_bulk_sup.max(g.c.max_abs());
        }
        model = next;
        take_snapshots(&model, &mut pending_snaps, &mut snapshots);
        if k % every == 0 || k == n_steps {
            observe_record(&model, &monitor, &mut tracker, &mut records, &mut interfaces);
            if (k / every) % holder_stride == 0 || k == n_steps {
                monitor.sample_holder(model.phase());
            }
        }
    }

    if error.is_some() && records.last().is_some_and(|r| r.t < model.phase().t) {
        observe_record(&model, &monitor, &mut tracker, &mut records, &mut interfaces);
        records.retain(DiagnosticsRecord::is_finite);
    }
    let state = model.phase();
    let e0 = monitor.initial_energy();
    let tallies = &state.tallies;
    let mut metrics = BTreeMap::new();
    let mut put = |k: &str, v: f64| {
        metrics.insert(k.to_string(), v);
    };
    put("initial_energy", e0);
    put("final_energy", monitor.energy());
    put("max_energy", monitor.max_energy());
    put("action", tallies.action);
    put("lambda", tallies.budget.lambda);
    put("lambda1", tallies.budget.lambda1);
    put("dissipation", tallies.dissipation);
    put("kinetic", tallies.kinetic);
    put("willmore", tallies.willmore);
    put("closure", monitor.closure(state));
    put("max_dissipation_residual", monitor.max_dissipation_residual());
    put("max_projection_ratio", monitor.max_projection_ratio());
    put("max_sup_abs_u", monitor.max_sup_abs_u());
    put("l2flow_functional", monitor.l2flow_functional());
    put("weak_bulk_residual", monitor.weak_bulk_residual());
    put("max_density_ratio", tracker.max_density_ratio);
    if let Some(last) = records.last() {
        put("discrepancy_l1", last.discrepancy_l1);
        put("curvature_pairing", last.curvature_pairing);
        put("brakke_min_slack", last.brakke_min_slack);
    }
    let holder = monitor.holder_report(tallies.kinetic);
    put("holder_observed", holder.observed);
    put("holder_constant", holder.constant);

    let mut asserts = Vec::new();
    asserts.push(Assertion::at_most("energy-bound", monitor.energy_excess() / e0, 0.0, 0.02));
    asserts.push(Assertion::at_most("dissipation-closure", monitor.closure(state), 0.0, 0.02));
    let action_scale = tallies.budget.lambda.max(e0);
    asserts.push(Assertion::at_most(
        "action-identity",
        (tallies.action - tallies.budget.lambda).abs() / action_scale,
        0.0,
        0.05,
    ));
    asserts.push(Assertion::at_most("projection", monitor.max_projection_ratio(), 0.0, 1e-20));
    let sup_bound = match config.scenario {
        ScenarioKind::GrainBoundary => grain_phase_bound(eps * tracker.max_bulk_sup),
        _ => 1.0,
    };
    asserts.push(Assertion::at_most("max-principle", monitor.max_sup_abs_u(), sup_bound, 1e-9));
    let min_slack = monitor.brakke_slacks(tallies.budget.lambda).into_iter().fold(f64::INFINITY, f64::min);
    asserts.push(Assertion::at_least("brakke-slack", min_slack / e0, 0.0, 1e-2));
    let nonfinite = records.iter().filter(|r| !r.is_finite()).count();
    asserts.push(Assertion::at_most("finite", nonfinite as f64, 0.0, 0.0));
    asserts.push(Assertion::at_most("holder", holder.observed, holder.constant, 0.0));

    match config.scenario {
        ScenarioKind::StandingProfile => {
            let h = grid.spacing();
            put("front_drift", tracker.front_drift);
            asserts.push(Assertion::at_most("profile-drift", tracker.front_drift, 0.0, h / 10.0));
            if let Some(last) = records.last() {
                asserts.push(Assertion::at_most(
                    "profile-discrepancy",
                    last.discrepancy_l1 / last.energy,
                    0.0,
                    1e-3,
                ));
            }
            if let Some(area) = plane_section(&config, &grid) {
                let expected = c0() * area;
                put("expected_energy", expected);
                asserts.push(Assertion::at_most("profile-energy", (monitor.energy() - expected).abs(), 0.0, 1e-3 * area));
            }
        }
        ScenarioKind::TravelingFront => {
            let theta = config.forcing.theta.unwrap_or(0.0);
            match front_speed(&tracker.front, 0.1 * grid.spacing().max(eps)) {
                Ok(fit) => {
                    put("front_speed", fit.speed);
                    put("front_rms", fit.rms);
                    asserts.push(Assertion::at_most(
                        "front-speed",
                        (fit.speed - theta).abs() / theta.abs().max(f64::MIN_POSITIVE),
                        0.0,
                        0.03,
                    ));
                }
                Err(e) => {
                    if error.is_none() {
                        error = Some(format!("front speed: {e}"));
                    }
                }
            }
        }
        ScenarioKind::CircleMcf | ScenarioKind::CircleForced | ScenarioKind::DriftCircle => {
            let tol = if grid.dim() == 3 { 0.04 } else { 0.02 };
            if let Some(r) = records.last().and_then(|r| r.radius) {
                put("final_radius", r);
            }
            if let Some(oracle) = &oracle {
                if let Some(r) = oracle.radius_at(state.t).radius() {
                    put("oracle_radius", r);
                }
                if tracker.radius_checked > 0 {
                    put("interface_error", tracker.radius_error);
                    asserts.push(Assertion::at_most("radius-tracking", tracker.radius_error, 0.0, tol));
                }
                if let (Some(te), Some(seen), Some(gone)) =
                    (oracle.extinction_time(), tracker.last_seen, tracker.vanished_at)
                {
                    let measured = 0.5 * (seen + gone);
                    put("extinction_time", measured);
                    put("oracle_extinction_time", te);
                    asserts.push(Assertion::at_most("extinction-time", (measured - te).abs() / te, 0.0, 0.05));
                }
            }
            if config.scenario == ScenarioKind::DriftCircle {
                let budget = tallies.budget;
                put("gronwall_energy_bound", e0 * budget.lambda1.exp());
                put("gronwall_lambda_bound", budget.gronwall_bound(e0));
                asserts.push(Assertion::at_most("drift-energy", monitor.max_energy(), e0 * budget.lambda1.exp(), 1e-9 * e0));
                asserts.push(Assertion::at_most("drift-budget", budget.lambda, budget.gronwall_bound(e0), 1e-9 * e0));
                if let (Some(c), GeometrySection::Ball { center, .. }, Some(b)) =
                    (tracker.center, &config.geometry, &config.forcing.drift)
                {
                    let err: f64 =
                        (0..grid.dim()).map(|a| (c[a] - (center[a] - b[a] * state.t)).powi(2)).sum::<f64>().sqrt();
                    put("center_error", err);
                }
            }
        }
        ScenarioKind::MsUndercooling => {
            put("max_conservation_drift", tracker.max_conservation);
            put("max_ms_identity", tracker.max_ms_identity);
            asserts.push(Assertion::at_most("ms-conservation", tracker.max_conservation, 0.0, 1e-3));
            asserts.push(Assertion::at_most("ms-energy-identity", tracker.max_ms_identity, 0.0, 0.02));
            asserts.push(Assertion::at_most("density-ratio", tracker.max_density_ratio, 10.0 * c0(), 0.0));
        }
        ScenarioKind::GrainBoundary => {
            let f0 = f0.expect("grain run has a free energy");
            put("initial_free_energy", f0);
            put("max_free_energy_increase", free_energy_violation);
            put("max_mass_drift", tracker.max_mass_drift);
            asserts.push(Assertion::at_most("grain-mass", tracker.max_mass_drift, 0.0, 1e-3));
            asserts.push(Assertion::at_most("grain-monotone", free_energy_violation, 0.0, 1e-6 * f0.abs()));
            let v = eps * grid.volume() * (1.0 + monitor.max_sup_abs_u()).powi(2);
            let bound = 4.0 * (f0 + v) * state.t;
            put("grain_lambda_bound", bound);
            asserts.push(Assertion::at_most("grain-lambda-bound", tallies.budget.lambda, bound, 0.0));
        }
    }

    let status = if error.is_some() { RunStatus::Failed } else { RunStatus::Completed };
    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        scenario: config.scenario,
        dim: grid.dim(),
        cells: config.cells.clone(),
        epsilon: eps,
        dt,
        steps: state.steps,
        horizon: config.horizon,
        status,
        error,
        warnings,
        final_record: records.last().cloned(),
        metrics,
        assertions: asserts,
    };
    Ok(RunArtifacts { summary, records, interfaces, snapshots })
}

/// Cross-section of an axis-aligned plane, `None` otherwise.
fn plane_section(config: &ScenarioConfig, grid: &Grid) -> Option<f64> {
    let GeometrySection::Plane { normal, .. } = &config.geometry else { return None };
    let axes: Vec<usize> = (0..grid.dim()).filter(|&a| normal[a] != 0.0).collect();
    match axes.as_slice() {
        [a] => Some(grid.volume() / grid.extent()[*a]),
        _ => None,
    }
}

pub const INTERFACE_HEADER: &str = "t,component,x,y,z";

/// Writes `diagnostics.csv`, `interface.csv`, `summary.json`, the resolved
/// `config.toml`, and `snapshots/*.pfs` under `dir`.
pub fn write_artifacts(dir: &Path, config: &ScenarioConfig, artifacts: &RunArtifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut csv = fs::File::create(dir.join("diagnostics.csv"))?;
    writeln!(csv, "{}", DiagnosticsRecord::csv_header())?;
    for r in &artifacts.records {
        writeln!(csv, "{}", r.csv_row())?;
    }
    let mut ifc = std::io::BufWriter::new(fs::File::create(dir.join("interface.csv"))?);
    writeln!(ifc, "{INTERFACE_HEADER}")?;
    for s in &artifacts.interfaces {
        writeln!(ifc, "{:e},{},{:e},{:e},{:e}", s.t, s.component, s.point[0], s.point[1], s.point[2])?;
    }
    ifc.flush()?;
    fs::write(dir.join("config.toml"), config.with_epsilon(artifacts.summary.epsilon).to_toml())?;
    if !artifacts.snapshots.is_empty() {
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps)?;
        for (name, snap) in &artifacts.snapshots {
            snap.write(snaps.join(format!("{name}.pfs")))?;
        }
    }
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&artifacts.summary)? + "\n")?;
    Ok(())
}

/// Validates, executes and persists one run.
pub fn run(config: &ScenarioConfig, epsilon: f64, dir: &Path) -> Result<RunSummary> {
    let artifacts = execute(config, epsilon)?;
    write_artifacts(dir, config, &artifacts)?;
    Ok(artifacts.summary)
}

/// Reads a `summary.json`, rejecting other schema versions.
pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != SCHEMA_VERSION {
        return Err(Error::Schema { expected: SCHEMA_VERSION, found });
    }
    Ok(serde_json::from_value(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> ScenarioConfig {
        ScenarioConfig::from_toml(
            r#"
scenario = "standing-profile"
dim = 1
extent = [1.0]
cells = [1024]
epsilons = [0.02]
horizon = 0.01
output_interval = 0.002
snapshot_times = [0.0, 0.01]

[stepper.dt]
rule = "cfl"
gamma_h = 0.2
gamma_eps = 0.01

[geometry]
kind = "plane"
point = [0.5]
normal = [1.0]
"#,
        )
        .unwrap()
    }

    #[test]
    fn standing_profile_passes() {
        let a = execute(&profile(), 0.02).unwrap();
        let s = &a.summary;
        assert_eq!(s.status, RunStatus::Completed);
        assert!(s.passed(), "{:#?}", s.assertions);
        assert_eq!(a.records.len(), 6);
        assert_eq!(a.snapshots.len(), 2);
        assert!(s.metric("front_drift").unwrap() < 1e-6);
    }

    #[test]
    fn invalid_config_computes_nothing() {
        let mut c = profile();
        c.cells = vec![16];
        assert!(matches!(execute(&c, 0.02), Err(Error::Config(_))));
    }

    #[test]
    fn blow_up_marks_failure() {
        let mut c = profile();
        c.stepper.dt = crate::solver::DtRule::Fixed { dt: 1.0 };
        c.horizon = 20.0;
        c.output_interval = 1.0;
        c.snapshot_times.clear();
        let a = execute(&c, 0.02).unwrap();
        assert_eq!(a.summary.status, RunStatus::Failed);
        assert!(a.summary.error.as_deref().unwrap().contains("non-finite"));
        assert!(!a.summary.passed());
        assert!(a.records.iter().all(|r| r.is_finite()));
    }

    #[test]
    fn artifacts_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = run(&profile(), 0.02, dir.path()).unwrap();
        let back = read_summary(&dir.path().join("summary.json")).unwrap();
        assert_eq!(back, s);
        let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert_eq!(csv.lines().count(), 7);
        let snap = Snapshot::read(dir.path().join("snapshots/u_0001.pfs")).unwrap();
        assert_eq!(snap.time, s.final_record.as_ref().unwrap().t);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("summary.json");
        fs::write(&p, r#"{"schema_version": 99}"#).unwrap();
        assert!(matches!(read_summary(&p), Err(Error::Schema { expected: 1, found: 99 })));
    }
}
