//! Scenario configuration, read from TOML and validated in one pass.
//!
//! ```toml
//! scenario = "circle-mcf"
//! dim = 2
//! extent = [1.0, 1.0]
//! cells = [256, 256]
//! epsilons = [0.02]
//! horizon = 0.03
//! output_interval = 0.001
//!
//! [geometry]
//! kind = "ball"
//! center = [0.5, 0.5]
//! radius = 0.3
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{ForcingSpec, ScalarSource, VectorSource};
use crate::grid::{Grid, Point};
use crate::linalg::CgSettings;
use crate::potential::{Geometry, PROFILE_MARGIN};
use crate::sharp::RadialOracle;
use crate::solver::{DtRule, LinearBackend, Scheme, StepperConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    StandingProfile,
    TravelingFront,
    CircleMcf,
    CircleForced,
    DriftCircle,
    MsUndercooling,
    GrainBoundary,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::StandingProfile => "standing-profile",
            Self::TravelingFront => "traveling-front",
            Self::CircleMcf => "circle-mcf",
            Self::CircleForced => "circle-forced",
            Self::DriftCircle => "drift-circle",
            Self::MsUndercooling => "ms-undercooling",
            Self::GrainBoundary => "grain-boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    #[default]
    Cosine,
    Cg,
}

fn default_scheme() -> Scheme {
    Scheme::SemiImplicit
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub dt: DtRule,
    #[serde(default)]
    pub solver: SolverKind,
}

impl Default for StepperSection {
    fn default() -> Self {
        Self { scheme: Scheme::SemiImplicit, dt: DtRule::default(), solver: SolverKind::Cosine }
    }
}

impl StepperSection {
    pub fn config(&self) -> StepperConfig {
        let backend = match self.solver {
            SolverKind::Cosine => LinearBackend::Cosine,
            SolverKind::Cg => LinearBackend::ConjugateGradient(CgSettings::default()),
        };
        StepperConfig { scheme: self.scheme, dt_rule: self.dt, backend }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySection {
    Plane { point: Vec<f64>, normal: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

fn pad(v: &[f64]) -> Point {
    std::array::from_fn(|a| v.get(a).copied().unwrap_or(0.0))
}

impl GeometrySection {
    pub fn geometry(&self) -> Geometry {
        match self {
            Self::Plane { point, normal } => Geometry::Plane { point: pad(point), normal: pad(normal) },
            Self::Ball { center, radius } => Geometry::Ball { center: pad(center), radius: *radius },
        }
    }
}

/// Forcing parameters; which ones apply depends on the scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    /// Scalar `theta` in `g = theta sqrt(2W(u))`.
    pub theta: Option<f64>,
    /// Constant drift `b` in `g = eps b . grad u + f sqrt(2W(u))`.
    pub drift: Option<Vec<f64>>,
    /// Constant `f` in the drift scenario.
    pub potential: Option<f64>,
}

fn default_floor() -> f64 {
    crate::coupled::DEFAULT_MOBILITY_FLOOR
}

/// Initial bulk field of the coupled scenarios: `amplitude` times a compact
/// bump of half-width `width` around `center`, or a constant without a width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default)]
    pub amplitude: f64,
    pub center: Option<Vec<f64>>,
    pub width: Option<f64>,
    #[serde(default = "default_floor")]
    pub mobility_floor: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self { amplitude: 0.0, center: None, width: None, mobility_floor: default_floor() }
    }
}

fn default_seed() -> u64 {
    7
}

fn default_battery() -> usize {
    crate::diagnostics::DEFAULT_BATTERY_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub dim: usize,
    pub extent: Vec<f64>,
    pub cells: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub output_interval: f64,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub stepper: StepperSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Permits a radial run to pass the oracle's extinction time.
    #[serde(default)]
    pub allow_extinction: bool,
    #[serde(default = "default_battery")]
    pub battery_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(&self.extent, &self.cells)
    }

    /// Forcing of the phase equation for this scenario.
    pub fn forcing_spec(&self) -> ForcingSpec {
        let theta = self.forcing.theta.unwrap_or(0.0);
        match self.scenario {
            ScenarioKind::StandingProfile | ScenarioKind::CircleMcf => ForcingSpec::Zero,
            ScenarioKind::TravelingFront | ScenarioKind::CircleForced => {
                ForcingSpec::ScaledScalar { theta: ScalarSource::Constant(theta) }
            }
            ScenarioKind::DriftCircle => ForcingSpec::DriftPotential {
                drift: VectorSource::Constant(pad(self.forcing.drift.as_deref().unwrap_or(&[]))),
                potential: ScalarSource::Constant(self.forcing.potential.unwrap_or(0.0)),
            },
            ScenarioKind::MsUndercooling => ForcingSpec::CoupledField,
            ScenarioKind::GrainBoundary => ForcingSpec::Concentration,
        }
    }

    /// Sharp-interface normal forcing that drives a ball outward.
    pub fn radial_forcing(&self) -> f64 {
        match self.scenario {
            ScenarioKind::CircleForced => self.forcing.theta.unwrap_or(0.0),
            ScenarioKind::DriftCircle => self.forcing.potential.unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Oracle for ball geometries in two or three dimensions.
    pub fn radial_oracle(&self) -> Option<RadialOracle> {
        match (&self.geometry, self.scenario) {
            (GeometrySection::Ball { radius, .. }, s)
                if self.dim >= 2
                    && matches!(s, ScenarioKind::CircleMcf | ScenarioKind::CircleForced | ScenarioKind::DriftCircle) =>
            {
                RadialOracle::new(self.dim, *radius, self.radial_forcing()).ok()
            }
            _ => None,
        }
    }

    /// Checks every rule and reports all violations together.
    pub fn validate(&self) -> Validation {
        let mut v = Validation::default();
        let err = |v: &mut Validation, m: String| v.errors.push(m);
        let dim = self.dim;
        if !(1..=3).contains(&dim) {
            err(&mut v, format!("dim must be 1, 2 or 3, got {dim}"));
        }
        if self.extent.len() != dim {
            err(&mut v, format!("extent has {} entries, dim is {dim}", self.extent.len()));
        }
        if self.cells.len() != dim {
            err(&mut v, format!("cells has {} entries, dim is {dim}", self.cells.len()));
        }
        let grid = if self.extent.len() == dim && self.cells.len() == dim {
            match self.grid() {
                Ok(g) => Some(g),
                Err(e) => {
                    err(&mut v, format!("grid: {e}"));
                    None
                }
            }
        } else {
            None
        };
        if self.epsilons.is_empty() {
            err(&mut v, "epsilons is empty".into());
        }
        for &eps in &self.epsilons {
            if !(eps > 0.0 && eps.is_finite()) {
                err(&mut v, format!("epsilon {eps} is not positive"));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            err(&mut v, format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.output_interval > 0.0 && self.output_interval <= self.horizon) {
            err(&mut v, format!("output_interval must lie in (0, horizon], got {}", self.output_interval));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.horizon).contains(&t) {
                err(&mut v, format!("snapshot time {t} lies outside [0, horizon]"));
            }
        }
        if self.battery_size == 0 {
            err(&mut v, "battery_size must be at least 1".into());
        }

        let geometry_dims = match &self.geometry {
            GeometrySection::Plane { point, normal } => {
                if normal.iter().all(|x| *x == 0.0) {
                    err(&mut v, "plane normal is zero".into());
                }
                [point.len(), normal.len()]
            }
            GeometrySection::Ball { center, radius } => {
                if !(*radius > 0.0) {
                    err(&mut v, format!("ball radius must be positive, got {radius}"));
                }
                [center.len(), dim]
            }
        };
        if geometry_dims.iter().any(|&n| n != dim) {
            err(&mut v, format!("geometry coordinates must have {dim} entries"));
        }
        self.validate_scenario(&mut v);

        if let Some(grid) = grid {
            let h = grid.spacing();
            for &eps in self.epsilons.iter().filter(|e| **e > 0.0) {
                if h > eps / 2.0 {
                    err(&mut v, format!("h = {h:.4e} exceeds eps/2 for eps = {eps}; refine the grid"));
                } else if h > eps / 4.0 {
                    v.warnings.push(format!("h = {h:.4e} exceeds eps/4 for eps = {eps}; results are under-resolved"));
                }
                if geometry_dims.iter().all(|&n| n == dim) {
                    if let Err(e) = self.geometry.geometry().check_margin(&grid, PROFILE_MARGIN * eps) {
                        err(&mut v, format!("initial interface for eps = {eps}: {e}"));
                    }
                }
                if let Err(e) = self.stepper.config().resolve_dt(&grid, eps) {
                    err(&mut v, format!("time step for eps = {eps}: {e}"));
                }
            }
        }
        if let (Some(oracle), false) = (self.radial_oracle(), self.allow_extinction) {
            if let Some(te) = oracle.extinction_time() {
                if self.horizon >= te {
                    err(&mut v, format!(
                        "horizon {} reaches the extinction time {te:.4e}; set allow_extinction = true for an extinction study",
                        self.horizon
                    ));
                }
            }
        }
        v
    }

    fn validate_scenario(&self, v: &mut Validation) {
        let kind = self.scenario;
        let plane = matches!(self.geometry, GeometrySection::Plane { .. });
        let needs_plane = matches!(kind, ScenarioKind::StandingProfile | ScenarioKind::TravelingFront);
        let needs_ball = matches!(kind, ScenarioKind::CircleMcf | ScenarioKind::CircleForced | ScenarioKind::DriftCircle);
        if needs_plane && !plane {
            v.errors.push(format!("{} needs a plane geometry", kind.name()));
        }
        if needs_ball {
            if plane {
                v.errors.push(format!("{} needs a ball geometry", kind.name()));
            }
            if self.dim < 2 {
                v.errors.push(format!("{} needs dim 2 or 3", kind.name()));
            }
        }
        let f = &self.forcing;
        match kind {
            ScenarioKind::TravelingFront | ScenarioKind::CircleForced => {
                if f.theta.is_none() {
                    v.errors.push(format!("{} needs forcing.theta", kind.name()));
                }
            }
            ScenarioKind::DriftCircle => match &f.drift {
                None => v.errors.push("drift-circle needs forcing.drift".into()),
                Some(d) if d.len() != self.dim => {
                    v.errors.push(format!("forcing.drift must have {} entries", self.dim))
                }
                _ => {}
            },
            _ => {}
        }
        if kind == ScenarioKind::TravelingFront && self.output_interval * 10.0 > self.horizon {
            v.errors.push("traveling-front needs at least 10 outputs; shrink output_interval".into());
        }
        let c = &self.coupling;
        if let Some(w) = c.width {
            if !(w > 0.0) {
                v.errors.push(format!("coupling.width must be positive, got {w}"));
            }
            match &c.center {
                Some(center) if center.len() == self.dim => {}
                _ => v.errors.push(format!("coupling.center must have {} entries when width is set", self.dim)),
            }
        }
        if !(c.mobility_floor > 0.0) {
            v.errors.push(format!("coupling.mobility_floor must be positive, got {}", c.mobility_floor));
        }
    }

    /// Validation as a result: errors become `Error::Config`.
    pub fn check(&self) -> Result<Vec<String>> {
        let v = self.validate();
        if v.errors.is_empty() {
            Ok(v.warnings)
        } else {
            Err(Error::Config(v.errors))
        }
    }

    /// Copy restricted to a single epsilon.
    pub fn with_epsilon(&self, eps: f64) -> Self {
        Self { epsilons: vec![eps], ..self.clone() }
    }
}
