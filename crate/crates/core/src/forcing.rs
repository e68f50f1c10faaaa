//! Forcing families `g` entering `eps u_t = eps Lap u - W'(u)/eps + g`, and the
//! running budgets `Lambda = int int g^2/eps` and
//! `Lambda_1 = int sup_x (|f|^2 + |b|^2) dt`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{self, gradient, Point, ScalarField};
use crate::potential::sqrt_2w;

pub type ScalarFn = Arc<dyn Fn(f64, Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(f64, Point) -> Point + Send + Sync>;

/// A scalar coefficient: constant, closed form in `(t, x)`, or a sampled field.
#[derive(Clone)]
pub enum ScalarSource {
    Constant(f64),
    Function(ScalarFn),
    Field(ScalarField),
}

impl ScalarSource {
    pub fn function(f: impl Fn(f64, Point) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    fn sample(&self, t: f64, index: usize, x: Point) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Function(f) => f(t, x),
            Self::Field(field) => field.values()[index],
        }
    }

    fn sup_abs(&self, t: f64, grid: &grid::Grid) -> f64 {
        match self {
            Self::Constant(c) => c.abs(),
            Self::Function(f) => {
                (0..grid.len()).map(|i| f(t, grid.center(i)).abs()).fold(0.0, f64::max)
            }
            Self::Field(field) => field.max_abs(),
        }
    }
}

impl fmt::Debug for ScalarSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Function(_) => f.write_str("Function(..)"),
            Self::Field(_) => f.write_str("Field(..)"),
        }
    }
}

#[derive(Clone)]
pub enum VectorSource {
    Constant(Point),
    Function(VectorFn),
}

impl VectorSource {
    pub fn function(f: impl Fn(f64, Point) -> Point + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    fn sample(&self, t: f64, x: Point) -> Point {
        match self {
            Self::Constant(b) => *b,
            Self::Function(f) => f(t, x),
        }
    }
}

impl fmt::Debug for VectorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(b) => write!(f, "Constant({b:?})"),
            Self::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ForcingSpec {
    Zero,
    /// `g = theta sqrt(2W(u))`
    ScaledScalar { theta: ScalarSource },
    /// `g = eps b . grad u + f sqrt(2W(u))`
    DriftPotential { drift: VectorSource, potential: ScalarSource },
    /// `g = eps f |grad u|`
    GradientMagnitude { f: ScalarSource },
    /// `g = theta sqrt(2W(u))` with `theta` the evolving bulk field supplied as aux.
    CoupledField,
    /// `g = -f(c)`, `f(r) = r`, with `c` the concentration supplied as aux. This is
    /// the sign that makes the phase equation the L2 gradient flow of the free
    /// energy `... + (u + 1) f(c)`.
    Concentration,
}

impl ForcingSpec {
    /// True when `g` vanishes wherever `u = +-1`, so the maximum principle keeps
    /// `|u| <= 1`.
    pub fn degenerate_at_wells(&self) -> bool {
        matches!(self, Self::Zero | Self::ScaledScalar { .. } | Self::CoupledField)
    }

    /// `sup_x (|f|^2 + |b|^2)` at time `t` for drift-potential forcing.
    pub fn drift_sup_sq(&self, t: f64, grid: &grid::Grid) -> Option<f64> {
        match self {
            Self::DriftPotential { drift, potential } => {
                let fsup = potential.sup_abs(t, grid);
                let bsup = match drift {
                    VectorSource::Constant(b) => grid::dot(b, b),
                    VectorSource::Function(f) => (0..grid.len())
                        .map(|i| {
                            let b = f(t, grid.center(i));
                            grid::dot(&b, &b)
                        })
                        .fold(0.0, f64::max),
                };
                Some(fsup * fsup + bsup)
            }
            _ => None,
        }
    }
}

/// Auxiliary evolving fields some forcing variants read.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForcingAux<'a> {
    pub theta: Option<&'a ScalarField>,
    pub concentration: Option<&'a ScalarField>,
}

/// Pointwise `g` for the given variant at time `t`.
pub fn evaluate_forcing(
    spec: &ForcingSpec,
    t: f64,
    u: &ScalarField,
    epsilon: f64,
    aux: ForcingAux<'_>,
) -> Result<ScalarField> {
    let grid = *u.grid();
    let uv = u.values();
    let data: Vec<f64> = match spec {
        ForcingSpec::Zero => vec![0.0; grid.len()],
        ForcingSpec::ScaledScalar { theta } => (0..grid.len())
            .into_par_iter()
            .map(|i| theta.sample(t, i, grid.center(i)) * sqrt_2w(uv[i]))
            .collect(),
        ForcingSpec::DriftPotential { drift, potential } => {
            let grad = gradient(u);
            let gv = grad.values();
            (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let x = grid.center(i);
                    let b = drift.sample(t, x);
                    epsilon * grid::dot(&b, &gv[i]) + potential.sample(t, i, x) * sqrt_2w(uv[i])
                })
                .collect()
        }
        ForcingSpec::GradientMagnitude { f } => {
            let grad = gradient(u);
            let gv = grad.values();
            (0..grid.len())
                .into_par_iter()
                .map(|i| epsilon * f.sample(t, i, grid.center(i)) * grid::dot(&gv[i], &gv[i]).sqrt())
                .collect()
        }
        ForcingSpec::CoupledField => {
            let theta = aux.theta.ok_or(Error::MissingAux("theta"))?;
            check_same_grid(u, theta)?;
            uv.par_iter().zip(theta.values()).map(|(&r, &th)| th * sqrt_2w(r)).collect()
        }
        ForcingSpec::Concentration => {
            let c = aux.concentration.ok_or(Error::MissingAux("concentration"))?;
            check_same_grid(u, c)?;
            c.values().iter().map(|&c| -c).collect()
        }
    };
    Ok(ScalarField::from_raw(grid, data))
}

fn check_same_grid(a: &ScalarField, b: &ScalarField) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::FieldMismatch("auxiliary field lives on a different grid".into()));
    }
    Ok(())
}

/// Cumulative forcing budgets. Both tallies are nondecreasing.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForcingBudget {
    /// `int_0^t int g^2 / eps dx dt`
    pub lambda: f64,
    /// `int_0^t sup_x (|f|^2 + |b|^2) dt`, drift-potential runs only.
    pub lambda1: f64,
}

impl ForcingBudget {
    /// Adds one step of length `dt`; `drift_sup_sq` is the Lambda_1 integrand.
    pub fn step(&self, g: &ScalarField, epsilon: f64, dt: f64, drift_sup_sq: Option<f64>) -> Self {
        assert!(dt > 0.0, "budget step needs dt > 0");
        let g2 = grid::integrate_product(g, g);
        Self {
            lambda: self.lambda + dt * g2 / epsilon,
            lambda1: self.lambda1 + dt * drift_sup_sq.unwrap_or(0.0),
        }
    }

    /// The drift-potential bound `4 Lambda_0 e^{Lambda_1} Lambda_1`.
    pub fn gronwall_bound(&self, initial_energy: f64) -> f64 {
        4.0 * initial_energy * self.lambda1.exp() * self.lambda1
    }
}
