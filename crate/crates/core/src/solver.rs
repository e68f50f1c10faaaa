//! Time stepping for the perturbed Allen–Cahn equation
//!
//! ```text
//! eps u_t = eps Lap u - W'(u)/eps + g,   grad u . n = 0 on the walls,
//! ```
//!
//! advanced as `u_t = Lap u - W'(u)/eps^2 + g/eps`. The semi-implicit scheme
//! treats the Laplacian implicitly and `W'` and `g` at the pre-step state; the
//! explicit scheme treats everything at the pre-step state.
//!
//! Each step also updates the running tallies used by the diagnostics:
//! the action `S = int int (sqrt(eps) u_t + w/sqrt(eps))^2`, the forcing budget,
//! the dissipation `int int (eps u_t^2 + w^2/eps)` and the Willmore tally
//! `int int w^2/eps`. The chemical potential `w` in these tallies is the
//! scheme-consistent one (implicit Laplacian, explicit `W'`), so the action
//! integrand reproduces `g^2/eps` of the pre-step forcing; the budget itself
//! evaluates `g` at the time midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{evaluate_forcing, ForcingAux, ForcingBudget, ForcingSpec};
use crate::grid::{integrate_product, laplacian, Grid, ScalarField};
use crate::linalg::{conjugate_gradient, CgSettings, CosineSolver, ShiftedDiffusion};
use crate::potential::w_prime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

/// Fraction of the explicit stability limit `h^2/(2n)` a CFL-scaled step may use.
pub const EXPLICIT_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DtRule {
    Fixed { dt: f64 },
    /// Explicit: `min(gamma_h h^2, gamma_eps eps^2)`, capped at
    /// `EXPLICIT_SAFETY h^2/(2n)`. Semi-implicit: `gamma_eps eps^2`.
    Cfl { gamma_h: f64, gamma_eps: f64 },
}

impl Default for DtRule {
    fn default() -> Self {
        Self::Cfl { gamma_h: 0.2, gamma_eps: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearBackend {
    Cosine,
    ConjugateGradient(CgSettings),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    pub dt_rule: DtRule,
    pub backend: LinearBackend,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { scheme: Scheme::SemiImplicit, dt_rule: DtRule::default(), backend: LinearBackend::Cosine }
    }
}

impl StepperConfig {
    pub fn explicit() -> Self {
        Self { scheme: Scheme::Explicit, ..Self::default() }
    }

    pub fn with_dt_rule(mut self, rule: DtRule) -> Self {
        self.dt_rule = rule;
        self
    }

    pub fn with_backend(mut self, backend: LinearBackend) -> Self {
        self.backend = backend;
        self
    }

    /// Resolves the step size and checks the explicit stability limit.
    pub fn resolve_dt(&self, grid: &Grid, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::Stepper(format!("epsilon must be positive, got {epsilon}")));
        }
        let h = grid.spacing();
        let dt = match (self.dt_rule, self.scheme) {
            (DtRule::Fixed { dt }, _) => dt,
            (DtRule::Cfl { gamma_h, gamma_eps }, Scheme::Explicit) => (gamma_h * h * h)
                .min(gamma_eps * epsilon * epsilon)
                .min(EXPLICIT_SAFETY * h * h / (2.0 * grid.dim() as f64)),
            (DtRule::Cfl { gamma_eps, .. }, Scheme::SemiImplicit) => gamma_eps * epsilon * epsilon,
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Stepper(format!("time step must be positive, got {dt}")));
        }
        if self.scheme == Scheme::Explicit {
            let limit = h * h / (2.0 * grid.dim() as f64);
            if dt >= limit {
                return Err(Error::Stepper(format!(
                    "explicit step {dt:.3e} violates dt < h^2/(2n) = {limit:.3e}"
                )));
            }
        }
        Ok(dt)
    }
}

/// Cumulative integrals carried along a run. All are nondecreasing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tallies {
    /// `int int (sqrt(eps) u_t + w/sqrt(eps))^2`
    pub action: f64,
    pub budget: ForcingBudget,
    /// `int int (eps u_t^2 + w^2/eps)`
    pub dissipation: f64,
    /// `int int w^2/eps`
    pub willmore: f64,
    /// `int int eps u_t^2`
    pub kinetic: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: ScalarField,
    pub epsilon: f64,
    pub dt: f64,
    pub steps: u64,
    pub tallies: Tallies,
}

/// Result of one step: the new state plus the fields the diagnostics need.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: SolverState,
    /// Forcing at the pre-step state, as used by the scheme.
    pub forcing: ScalarField,
    /// Forcing at the time midpoint, as used by the budget tally.
    pub forcing_mid: ScalarField,
    /// Scheme-consistent chemical potential for this step.
    pub chemical_potential: ScalarField,
}

/// `w = -eps Lap u + W'(u)/eps`
pub fn chemical_potential(u: &ScalarField, epsilon: f64) -> ScalarField {
    laplacian(u).zip_map(u, |lap, r| -epsilon * lap + w_prime(r) / epsilon)
}

/// Chemical potential at the point the scheme evaluated: implicit Laplacian
/// and explicit `W'` for the semi-implicit scheme, pre-step state otherwise.
pub fn scheme_chemical_potential(
    before: &ScalarField,
    after: &ScalarField,
    epsilon: f64,
    scheme: Scheme,
) -> ScalarField {
    match scheme {
        Scheme::Explicit => chemical_potential(before, epsilon),
        Scheme::SemiImplicit => {
            laplacian(after).zip_map(before, |lap, r| -epsilon * lap + w_prime(r) / epsilon)
        }
    }
}

/// The action-integrand root and its deviation from `g / sqrt(eps)`.
#[derive(Debug, Clone)]
pub struct ActionResidual {
    pub field: ScalarField,
    /// `|field - g/sqrt(eps)|_2 / (|g/sqrt(eps)|_2 + 1e-12)`
    pub defect: f64,
}

/// `sqrt(eps) (u_after - u_before)/dt + w/sqrt(eps)` at the scheme-consistent point.
pub fn residual(
    before: &SolverState,
    after: &SolverState,
    g: &ScalarField,
    scheme: Scheme,
) -> ActionResidual {
    let eps = before.epsilon;
    let dt = after.t - before.t;
    let se = eps.sqrt();
    let w = scheme_chemical_potential(&before.u, &after.u, eps, scheme);
    let dut = after.u.lin_comb(1.0 / dt, &before.u, -1.0 / dt);
    let field = dut.lin_comb(se, &w, 1.0 / se);
    let target = g.scale(1.0 / se);
    let defect = field.lin_comb(1.0, &target, -1.0).l2_norm() / (target.l2_norm() + 1e-12);
    ActionResidual { field, defect }
}

pub struct Stepper {
    grid: Grid,
    epsilon: f64,
    dt: f64,
    config: StepperConfig,
    cosine: Option<CosineSolver>,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("grid", &self.grid)
            .field("epsilon", &self.epsilon)
            .field("dt", &self.dt)
            .field("config", &self.config)
            .finish()
    }
}

impl Stepper {
    pub fn new(grid: &Grid, epsilon: f64, config: StepperConfig) -> Result<Self> {
        let dt = config.resolve_dt(grid, epsilon)?;
        let cosine = matches!(config.backend, LinearBackend::Cosine).then(|| CosineSolver::new(grid));
        Ok(Self { grid: *grid, epsilon, dt, config, cosine })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn initial_state(&self, u0: ScalarField) -> SolverState {
        SolverState { t: 0.0, u: u0, epsilon: self.epsilon, dt: self.dt, steps: 0, tallies: Tallies::default() }
    }

    /// Solves `(I - coef Lap) x = rhs` with the configured backend.
    pub fn implicit_solve(&self, rhs: &ScalarField, coef: f64, guess: &ScalarField) -> Result<ScalarField> {
        match (&self.cosine, self.config.backend) {
            (Some(c), _) => Ok(c.solve(rhs, coef)),
            (None, LinearBackend::ConjugateGradient(settings)) => {
                let op = ShiftedDiffusion { grid: &self.grid, shift: 1.0, scale: coef, mobility: None };
                let mut x = guess.values().to_vec();
                conjugate_gradient(&op, rhs.values(), &mut x, settings)?;
                Ok(ScalarField::from_raw(self.grid, x))
            }
            (None, LinearBackend::Cosine) => unreachable!("cosine backend always builds its solver"),
        }
    }

    pub fn step(&self, state: &SolverState, forcing: &ForcingSpec, aux: ForcingAux<'_>) -> Result<StepOutcome> {
        let eps = self.epsilon;
        let dt = self.dt;
        let u = &state.u;
        let g = evaluate_forcing(forcing, state.t, u, eps, aux)?;
        let reaction = u.zip_map(&g, |r, gi| -w_prime(r) / (eps * eps) + gi / eps);
        let next = match self.config.scheme {
            Scheme::Explicit => {
                let lap = laplacian(u);
                let mut v = u.clone();
                v.values_mut()
                    .iter_mut()
                    .zip(lap.values().iter().zip(reaction.values()))
                    .for_each(|(x, (l, r))| *x += dt * (l + r));
                v
            }
            Scheme::SemiImplicit => self.implicit_solve(&u.lin_comb(1.0, &reaction, dt), dt, u)?,
        };
        let t_next = state.t + dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { t: t_next });
        }

        let w = scheme_chemical_potential(u, &next, eps, self.config.scheme);
        let dut = next.lin_comb(1.0 / dt, u, -1.0 / dt);
        let mid = next.lin_comb(0.5, u, 0.5);
        let t_mid = state.t + 0.5 * dt;
        let g_mid = evaluate_forcing(forcing, t_mid, &mid, eps, aux)?;

        let se = eps.sqrt();
        let root = dut.lin_comb(se, &w, 1.0 / se);
        let kinetic = eps * integrate_product(&dut, &dut);
        let willmore = integrate_product(&w, &w) / eps;
        let mut tallies = state.tallies;
        tallies.action += dt * integrate_product(&root, &root);
        tallies.budget = tallies.budget.step(&g_mid, eps, dt, forcing.drift_sup_sq(t_mid, &self.grid));
        tallies.dissipation += dt * (kinetic + willmore);
        tallies.willmore += dt * willmore;
        tallies.kinetic += dt * kinetic;

        Ok(StepOutcome {
            state: SolverState {
                t: t_next,
                u: next,
                epsilon: eps,
                dt,
                steps: state.steps + 1,
                tallies,
            },
            forcing: g,
            forcing_mid: g_mid,
            chemical_potential: w,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ScalarSource;
    use crate::potential::{well_prepared_initial, Geometry, ProfileSpec};

    fn planar(n: usize, eps: f64) -> ScalarField {
        let grid = Grid::new(&[1.0], &[n]).unwrap();
        let spec = ProfileSpec {
            epsilon: eps,
            geometry: Geometry::Plane { point: [0.5, 0.0, 0.0], normal: [1.0, 0.0, 0.0] },
        };
        well_prepared_initial(&spec, &grid).unwrap()
    }

    #[test]
    fn chemical_potential_at_wells_and_zero() {
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        assert_eq!(chemical_potential(&ScalarField::constant(grid, 1.0), 0.1).max_abs(), 0.0);
        assert_eq!(chemical_potential(&ScalarField::zeros(grid), 0.1).max_abs(), 0.0);
    }

    #[test]
    fn profile_chemical_potential_is_discretization_error() {
        // narrow enough that the wall sees a flat profile
        let eps = 0.03;
        let err = |n| chemical_potential(&planar(n, eps), eps).max_abs();
        let (e1, e2, e3) = (err(200), err(400), err(800));
        assert!((e1 / e2 - 4.0).abs() < 0.2, "{}", e1 / e2);
        assert!((e2 / e3 - 4.0).abs() < 0.2, "{}", e2 / e3);
    }

    #[test]
    fn wells_are_stationary() {
        for scheme_cfg in [StepperConfig::default(), StepperConfig::explicit()] {
            let grid = Grid::cube(2, 1.0, 16).unwrap();
            let stepper = Stepper::new(&grid, 0.1, scheme_cfg).unwrap();
            for value in [1.0, -1.0] {
                let mut s = stepper.initial_state(ScalarField::constant(grid, value));
                for _ in 0..5 {
                    let out = stepper.step(&s, &ForcingSpec::Zero, ForcingAux::default()).unwrap();
                    let change = out.state.u.lin_comb(1.0, &s.u, -1.0).max_abs();
                    assert!(change <= 1e-14, "change {change}");
                    s = out.state;
                }
                assert_eq!(s.tallies.action, 0.0);
                assert!(s.tallies.dissipation <= 1e-24);
            }
        }
    }

    #[test]
    fn explicit_stability_limit_is_enforced() {
        let grid = Grid::cube(2, 1.0, 32).unwrap();
        let h = grid.spacing();
        let cfg = StepperConfig::explicit().with_dt_rule(DtRule::Fixed { dt: h * h / 4.0 });
        assert!(Stepper::new(&grid, 0.1, cfg).is_err());
        let cfg = StepperConfig::explicit().with_dt_rule(DtRule::Fixed { dt: 0.99 * h * h / 4.0 });
        assert!(Stepper::new(&grid, 0.1, cfg).is_ok());
        assert!(StepperConfig::default().resolve_dt(&grid, 0.0).is_err());
    }

    #[test]
    fn cfl_rule_per_scheme() {
        let grid = Grid::cube(1, 1.0, 100).unwrap();
        let h = grid.spacing();
        let semi = StepperConfig::default().resolve_dt(&grid, 0.05).unwrap();
        assert!((semi - 0.2 * 0.05 * 0.05).abs() < 1e-18);
        let exp = StepperConfig::explicit().resolve_dt(&grid, 0.05).unwrap();
        assert!((exp - 0.2 * h * h).abs() < 1e-18);
        let cube = Grid::cube(3, 1.0, 16).unwrap();
        let h = cube.spacing();
        let exp = StepperConfig::explicit().resolve_dt(&cube, 1.0).unwrap();
        assert!((exp - EXPLICIT_SAFETY * h * h / 6.0).abs() < 1e-18);
    }

    #[test]
    fn semi_implicit_and_explicit_agree() {
        let eps = 0.05;
        let u0 = planar(200, eps);
        let grid = *u0.grid();
        let dt = 0.1 * grid.spacing().powi(2);
        let forcing = ForcingSpec::ScaledScalar { theta: ScalarSource::Constant(1.0) };
        let run = |cfg: StepperConfig| {
            let st = Stepper::new(&grid, eps, cfg.with_dt_rule(DtRule::Fixed { dt })).unwrap();
            let mut s = st.initial_state(u0.clone());
            for _ in 0..200 {
                s = st.step(&s, &forcing, ForcingAux::default()).unwrap().state;
            }
            s.u
        };
        let a = run(StepperConfig::default());
        let b = run(StepperConfig::explicit());
        let c = run(StepperConfig::default().with_backend(LinearBackend::ConjugateGradient(CgSettings::default())));
        assert!(a.lin_comb(1.0, &b, -1.0).max_abs() < 1e-3);
        assert!(a.lin_comb(1.0, &c, -1.0).max_abs() < 1e-9);
    }

    #[test]
    fn residual_reproduces_forcing() {
        let eps = 0.05;
        let u0 = planar(200, eps);
        let grid = *u0.grid();
        let forcing = ForcingSpec::ScaledScalar { theta: ScalarSource::Constant(0.5) };
        let st = Stepper::new(&grid, eps, StepperConfig::default()).unwrap();
        let s0 = st.initial_state(u0);
        let out = st.step(&s0, &forcing, ForcingAux::default()).unwrap();
        let r = residual(&s0, &out.state, &out.forcing, Scheme::SemiImplicit);
        assert!(r.defect < 1e-9, "defect {}", r.defect);
        let r_mid = residual(&s0, &out.state, &out.forcing_mid, Scheme::SemiImplicit);
        assert!(r_mid.defect < 0.05, "defect {}", r_mid.defect);
        // the tally accumulates the same integrand
        let direct = out.state.dt * crate::grid::integrate_product(&r.field, &r.field);
        assert!((direct - out.state.tallies.action).abs() <= 1e-12 * direct);
    }

    #[test]
    fn stationary_residual_is_zero() {
        let grid = Grid::cube(1, 1.0, 16).unwrap();
        let st = Stepper::new(&grid, 0.1, StepperConfig::default()).unwrap();
        let s0 = st.initial_state(ScalarField::constant(grid, 1.0));
        let out = st.step(&s0, &ForcingSpec::Zero, ForcingAux::default()).unwrap();
        let r = residual(&s0, &out.state, &out.forcing, Scheme::SemiImplicit);
        assert_eq!(r.field.max_abs(), 0.0);
    }

    #[test]
    fn maximum_principle_with_scaled_forcing() {
        let eps = 0.04;
        let grid = Grid::cube(2, 1.0, 64).unwrap();
        let spec = ProfileSpec { epsilon: eps, geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.25 } };
        let u0 = well_prepared_initial(&spec, &grid).unwrap();
        let forcing = ForcingSpec::ScaledScalar { theta: ScalarSource::Constant(3.0) };
        let st = Stepper::new(&grid, eps, StepperConfig::default()).unwrap();
        let mut s = st.initial_state(u0);
        for _ in 0..100 {
            s = st.step(&s, &forcing, ForcingAux::default()).unwrap().state;
            assert!(s.u.max_abs() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let grid = Grid::cube(1, 1.0, 16).unwrap();
        let cfg = StepperConfig::default().with_dt_rule(DtRule::Fixed { dt: 1.0 });
        let st = Stepper::new(&grid, 0.01, cfg).unwrap();
        let mut s = st.initial_state(ScalarField::constant(grid, 3.0));
        let mut failed = false;
        for _ in 0..20 {
            match st.step(&s, &ForcingSpec::Zero, ForcingAux::default()) {
                Ok(o) => s = o.state,
                Err(Error::NonFinite { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(failed);
    }
}
