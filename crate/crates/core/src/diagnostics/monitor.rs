//! Per-step accumulation of diagnostics along a run.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::battery::TestFunctionBattery;
use super::{
    cumulative_closure, density_radii, density_ratio, discrepancy, interface_centers, measure_density,
    projection_residual, HolderCheck, HolderReport,
};
use crate::grid::{dot, gradient, integrate, Point, ScalarField};
use crate::potential::c0;
use crate::solver::{chemical_potential, SolverState, StepOutcome};

/// Running sums for one test function `zeta = tau(t) phi(x)`:
///
/// * `a = sum (tau^{n+1} - tau^n) int phi e_mid`, the `d zeta/dt` term,
/// * `b = -sum dt tau_mid int eps u_t grad phi . grad u_mid`, the transport term,
/// * `c = sum dt tau_mid int phi (eps u_t^2 + w^2/eps)`, the dissipation term,
/// * `bulk`, the weak-form defect of the bulk equation for coupled runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BatteryTally {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub bulk: f64,
}

impl BatteryTally {
    /// `a + b - c/2 + |zeta|_inf Lambda / 2`; nonnegative for the continuous flow.
    pub fn slack(&self, sup: f64, lambda: f64) -> f64 {
        self.a + self.b - 0.5 * self.c + 0.5 * sup * lambda
    }

    /// `|int int (d zeta/dt + grad zeta . v)| / |zeta|_inf`
    pub fn transport(&self, sup: f64) -> f64 {
        (self.a + self.b).abs() / sup
    }
}

/// Values measured on a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCheck {
    pub energy: f64,
    pub dissipation_residual: f64,
    /// Tangential over total kinetic energy of the diffuse velocity.
    pub projection_ratio: f64,
    pub sup_abs_u: f64,
}

pub const RECORD_COLUMNS: [&str; 20] = [
    "t",
    "energy",
    "action",
    "lambda",
    "lambda1",
    "willmore",
    "dissipation",
    "discrepancy_l1",
    "dissipation_residual",
    "closure",
    "projection_residual",
    "curvature_pairing",
    "brakke_min_slack",
    "radius",
    "density_ratio",
    "sup_abs_u",
    "conserved",
    "ms_identity",
    "free_energy",
    "mass",
];

/// One row of the diagnostics table. Scenario-specific entries are `None`
/// when they do not apply and are written as empty cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `E(u)`, which is also the total diffuse area `mu(box)`.
    pub energy: f64,
    pub action: f64,
    pub lambda: f64,
    pub lambda1: f64,
    pub willmore: f64,
    pub dissipation: f64,
    pub discrepancy_l1: f64,
    /// Largest per-step dissipation residual so far.
    pub dissipation_residual: f64,
    /// Closure of the telescoped energy balance so far.
    pub closure: f64,
    /// Largest tangential-to-total kinetic ratio so far.
    pub projection_residual: f64,
    /// Largest curvature-pairing residual over the battery at this time.
    pub curvature_pairing: f64,
    /// Smallest running Brakke slack over the battery.
    pub brakke_min_slack: f64,
    pub radius: Option<f64>,
    pub density_ratio: f64,
    pub sup_abs_u: f64,
    pub conserved: Option<f64>,
    pub ms_identity: Option<f64>,
    pub free_energy: Option<f64>,
    pub mass: Option<f64>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        RECORD_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        let fixed = [
            self.t,
            self.energy,
            self.action,
            self.lambda,
            self.lambda1,
            self.willmore,
            self.dissipation,
            self.discrepancy_l1,
            self.dissipation_residual,
            self.closure,
            self.projection_residual,
            self.curvature_pairing,
            self.brakke_min_slack,
        ];
        let mut cells: Vec<String> = fixed.iter().map(|v| v.to_string()).collect();
        cells.push(cell(self.radius));
        cells.push(self.density_ratio.to_string());
        cells.push(self.sup_abs_u.to_string());
        cells.push(cell(self.conserved));
        cells.push(cell(self.ms_identity));
        cells.push(cell(self.free_energy));
        cells.push(cell(self.mass));
        cells.join(",")
    }

    /// True when every present entry is finite.
    pub fn is_finite(&self) -> bool {
        let opt = [self.radius, self.conserved, self.ms_identity, self.free_energy, self.mass];
        [
            self.t,
            self.energy,
            self.action,
            self.lambda,
            self.lambda1,
            self.willmore,
            self.dissipation,
            self.discrepancy_l1,
            self.dissipation_residual,
            self.closure,
            self.projection_residual,
            self.curvature_pairing,
            self.brakke_min_slack,
            self.density_ratio,
            self.sup_abs_u,
        ]
        .iter()
        .all(|v| v.is_finite())
            && opt.iter().flatten().all(|v| v.is_finite())
    }
}

/// Accumulates step-level diagnostics and produces records on demand.
#[derive(Debug, Clone)]
pub struct Monitor {
    epsilon: f64,
    initial_energy: f64,
    energy: f64,
    max_energy: f64,
    /// Largest `E(t) - E(0) - Lambda(t)/2`.
    energy_excess: f64,
    max_dissipation_residual: f64,
    max_projection_ratio: f64,
    max_sup_abs_u: f64,
    density: ScalarField,
    battery: Option<TestFunctionBattery>,
    tallies: Vec<BatteryTally>,
    holder: HolderCheck,
}

impl Monitor {
    pub fn new(initial: &SolverState, battery: Option<TestFunctionBattery>) -> Self {
        let density = measure_density(&initial.u, initial.epsilon);
        let energy = integrate(&density);
        let n = battery.as_ref().map_or(0, |b| b.len());
        let mut holder = HolderCheck::default();
        holder.push(initial.t, &initial.u);
        Self {
            epsilon: initial.epsilon,
            initial_energy: energy,
            energy,
            max_energy: energy,
            energy_excess: 0.0,
            max_dissipation_residual: 0.0,
            max_projection_ratio: 0.0,
            max_sup_abs_u: initial.u.max_abs(),
            density,
            battery,
            tallies: vec![BatteryTally::default(); n],
            holder,
        }
    }

    /// Folds one step into the running sums. `theta` carries the bulk field
    /// before and after the step for coupled runs.
    pub fn observe(
        &mut self,
        before: &SolverState,
        out: &StepOutcome,
        theta: Option<(&ScalarField, &ScalarField)>,
    ) -> StepCheck {
        let eps = self.epsilon;
        let after = &out.state;
        let dt = after.t - before.t;
        let density = measure_density(&after.u, eps);
        let energy = integrate(&density);
        let dut = after.u.lin_comb(1.0 / dt, &before.u, -1.0 / dt);
        let w = &out.chemical_potential;

        let g = &out.forcing;
        let lambda_rate = crate::grid::integrate_product(g, g) / eps;
        let diss_rate = eps * crate::grid::integrate_product(&dut, &dut) + crate::grid::integrate_product(w, w) / eps;
        let defect = (2.0 * (energy - self.energy) - dt * (lambda_rate - diss_rate)).abs();
        let dissipation_residual = if self.energy > 0.0 { defect / self.energy } else { defect };

        let proj = projection_residual(&before.u, &after.u, dt, eps);
        let projection_ratio = if proj.total > 0.0 { proj.tangential / proj.total } else { proj.tangential };

        if let Some(battery) = &self.battery {
            let mid = before.u.lin_comb(0.5, &after.u, 0.5);
            let grad_mid = gradient(&mid);
            let (t0, t1) = (before.t, after.t);
            let e0 = self.density.values();
            let e1 = density.values();
            let bulk = theta.map(|(th0, th1)| (th0.lin_comb(0.5, th1, 0.5), th1.clone()));
            let updates: Vec<BatteryTally> = battery
                .members()
                .par_iter()
                .map(|m| {
                    let (tau0, tau1) = (m.window.value(t0), m.window.value(t1));
                    let dtau = tau1 - tau0;
                    let tau_mid = 0.5 * (tau0 + tau1);
                    let mut acc = BatteryTally::default();
                    if tau0 == 0.0 && tau1 == 0.0 {
                        return acc;
                    }
                    let mut bulk_time = 0.0;
                    let mut bulk_space = 0.0;
                    for s in m.space.samples() {
                        let i = s.index;
                        let ut = dut.values()[i];
                        let wi = w.values()[i];
                        acc.a += s.value * 0.5 * (e0[i] + e1[i]);
                        acc.b -= eps * ut * dot(&s.gradient, &grad_mid.values()[i]);
                        acc.c += s.value * (eps * ut * ut + wi * wi / eps);
                        if let Some((th_mid, th1)) = &bulk {
                            bulk_time += s.value * (th_mid.values()[i] + 0.5 * c0() * mid.values()[i]);
                            bulk_space += s.laplacian * th1.values()[i];
                        }
                    }
                    let vol = after.u.grid().cell_volume();
                    acc.a *= dtau * vol;
                    acc.b *= dt * tau_mid * vol;
                    acc.c *= dt * tau_mid * vol;
                    acc.bulk = (dtau * bulk_time + dt * tau_mid * bulk_space) * vol;
                    acc
                })
                .collect();
            for (t, u) in self.tallies.iter_mut().zip(updates) {
                t.a += u.a;
                t.b += u.b;
                t.c += u.c;
                t.bulk += u.bulk;
            }
        }

        self.energy = energy;
        self.density = density;
        self.max_energy = self.max_energy.max(energy);
        self.energy_excess =
            self.energy_excess.max(energy - self.initial_energy - 0.5 * after.tallies.budget.lambda);
        self.max_dissipation_residual = self.max_dissipation_residual.max(dissipation_residual);
        self.max_projection_ratio = self.max_projection_ratio.max(projection_ratio);
        let sup = after.u.max_abs();
        self.max_sup_abs_u = self.max_sup_abs_u.max(sup);
        StepCheck { energy, dissipation_residual, projection_ratio, sup_abs_u: sup }
    }

    /// Adds a frame to the Hölder sampler.
    pub fn sample_holder(&mut self, state: &SolverState) {
        self.holder.push(state.t, &state.u);
    }

    pub fn record(&self, state: &SolverState) -> DiagnosticsRecord {
        let eps = self.epsilon;
        let tallies = &state.tallies;
        let radii = density_radii(state.u.grid(), eps);
        let centers = interface_centers(&state.u, 64);
        DiagnosticsRecord {
            t: state.t,
            energy: self.energy,
            action: tallies.action,
            lambda: tallies.budget.lambda,
            lambda1: tallies.budget.lambda1,
            willmore: tallies.willmore,
            dissipation: tallies.dissipation,
            discrepancy_l1: discrepancy(&state.u, eps).l1,
            dissipation_residual: self.max_dissipation_residual,
            closure: self.closure(state),
            projection_residual: self.max_projection_ratio,
            curvature_pairing: self.curvature_pairing(&state.u),
            brakke_min_slack: self.brakke_slacks(tallies.budget.lambda).into_iter().fold(0.0, f64::min),
            radius: None,
            density_ratio: density_ratio(&state.u, eps, &centers, &radii),
            sup_abs_u: state.u.max_abs(),
            conserved: None,
            ms_identity: None,
            free_energy: None,
            mass: None,
        }
    }

    pub fn closure(&self, state: &SolverState) -> f64 {
        cumulative_closure(self.initial_energy, self.energy, state.tallies.budget.lambda, state.tallies.dissipation)
    }

    /// Largest `|delta V(eta) + int eta . w grad u|` over `eta = phi (x - center)`
    /// for the battery's spatial factors.
    pub fn curvature_pairing(&self, u: &ScalarField) -> f64 {
        let Some(battery) = &self.battery else { return 0.0 };
        let eps = self.epsilon;
        let grid = u.grid();
        let dim = grid.dim();
        let e = measure_density(u, eps);
        let w = chemical_potential(u, eps);
        let grad = gradient(u);
        let vol = grid.cell_volume();
        battery
            .members()
            .par_iter()
            .map(|m| {
                let c = m.space.center();
                let mut total = 0.0;
                for s in m.space.samples() {
                    let i = s.index;
                    let x = grid.center(i);
                    let d: Point = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
                    let g = grad.values()[i];
                    let gn = dot(&g, &g).sqrt();
                    let nu = if gn <= super::DEGENERACY_THRESHOLD {
                        super::FALLBACK_AXIS
                    } else {
                        [g[0] / gn, g[1] / gn, g[2] / gn]
                    };
                    // D eta = d (x) grad phi + phi I
                    let div = dot(&d, &s.gradient) + dim as f64 * s.value;
                    let normal = dot(&nu, &d) * dot(&s.gradient, &nu) + s.value;
                    let eta = [s.value * d[0], s.value * d[1], s.value * d[2]];
                    total += (div - normal) * e.values()[i] + w.values()[i] * dot(&eta, &g);
                }
                (total * vol).abs()
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn brakke_slacks(&self, lambda: f64) -> Vec<f64> {
        match &self.battery {
            None => Vec::new(),
            Some(b) => {
                b.members().iter().zip(&self.tallies).map(|(m, t)| t.slack(m.sup_norm(), lambda)).collect()
            }
        }
    }

    /// Largest normalized transport defect over the battery.
    pub fn l2flow_functional(&self) -> f64 {
        match &self.battery {
            None => 0.0,
            Some(b) => b
                .members()
                .iter()
                .zip(&self.tallies)
                .map(|(m, t)| t.transport(m.sup_norm()))
                .fold(0.0, f64::max),
        }
    }

    /// Largest normalized weak-bulk defect over the battery.
    pub fn weak_bulk_residual(&self) -> f64 {
        match &self.battery {
            None => 0.0,
            Some(b) => b
                .members()
                .iter()
                .zip(&self.tallies)
                .map(|(m, t)| t.bulk.abs() / m.sup_norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn battery_tallies(&self) -> &[BatteryTally] {
        &self.tallies
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn max_energy(&self) -> f64 {
        self.max_energy
    }

    /// Largest `E(t) - E(0) - Lambda(t)/2` seen so far.
    pub fn energy_excess(&self) -> f64 {
        self.energy_excess
    }

    pub fn max_dissipation_residual(&self) -> f64 {
        self.max_dissipation_residual
    }

    pub fn max_projection_ratio(&self) -> f64 {
        self.max_projection_ratio
    }

    pub fn max_sup_abs_u(&self) -> f64 {
        self.max_sup_abs_u
    }

    pub fn holder_report(&self, kinetic: f64) -> HolderReport {
        self.holder.report(self.max_energy, kinetic)
    }
}
