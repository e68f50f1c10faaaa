//! Functionals and fields measured along a run.
//!
//! Notation: `e = eps/2 |grad u|^2 + W(u)/eps` is the diffuse area density,
//! `xi = eps/2 |grad u|^2 - W(u)/eps` the discrepancy, `nu = grad u / |grad u|`
//! the diffuse normal (pointing into `{u = +1}`) and `eps |grad u|^2` the
//! density of the second measure used for kinetic terms.

mod battery;
mod monitor;

pub use battery::{BumpWindow, SpatialBump, TestFunction, TestFunctionBattery, DEFAULT_BATTERY_SIZE};
pub use monitor::{BatteryTally, DiagnosticsRecord, Monitor, StepCheck, RECORD_COLUMNS};

use crate::grid::{
    ball_mass, dot, gradient, gradient_norm_sq, integrate, integrate_product, sum_ordered, Grid, Point,
    ScalarField, VectorField,
};
use crate::potential::{g_antiderivative, w_value};
use crate::solver::chemical_potential;

/// Below this gradient magnitude the normal falls back to `FALLBACK_AXIS` and
/// the velocity is zero.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
pub const FALLBACK_AXIS: Point = [1.0, 0.0, 0.0];

/// `eps/2 |grad u|^2 + W(u)/eps`, with the face-based gradient norm.
pub fn measure_density(u: &ScalarField, epsilon: f64) -> ScalarField {
    gradient_norm_sq(u).zip_map(u, |g2, r| 0.5 * epsilon * g2 + w_value(r) / epsilon)
}

pub fn energy(u: &ScalarField, epsilon: f64) -> f64 {
    integrate(&measure_density(u, epsilon))
}

#[derive(Debug, Clone)]
pub struct Discrepancy {
    pub field: ScalarField,
    pub l1: f64,
}

/// `eps/2 |grad u|^2 - W(u)/eps` and its L1 norm.
pub fn discrepancy(u: &ScalarField, epsilon: f64) -> Discrepancy {
    let field = gradient_norm_sq(u).zip_map(u, |g2, r| 0.5 * epsilon * g2 - w_value(r) / epsilon);
    let l1 = field.l1_norm();
    Discrepancy { field, l1 }
}

fn unit_or_fallback(g: &Point) -> Point {
    let n = dot(g, g).sqrt();
    if n <= DEGENERACY_THRESHOLD {
        FALLBACK_AXIS
    } else {
        [g[0] / n, g[1] / n, g[2] / n]
    }
}

pub fn diffuse_normal(u: &ScalarField) -> VectorField {
    let grad = gradient(u);
    let data = grad.values().iter().map(unit_or_fallback).collect();
    VectorField::from_raw(*u.grid(), data)
}

/// `v = -(u_t / |grad u|) nu` with `u_t` the difference quotient and the
/// gradient taken at the time midpoint.
pub fn diffuse_velocity(before: &ScalarField, after: &ScalarField, dt: f64) -> VectorField {
    let mid = before.lin_comb(0.5, after, 0.5);
    let grad = gradient(&mid);
    let data = grad
        .values()
        .iter()
        .zip(before.values().iter().zip(after.values()))
        .map(|(g, (a, b))| {
            let n2 = dot(g, g);
            if n2.sqrt() <= DEGENERACY_THRESHOLD {
                [0.0; 3]
            } else {
                let s = -(b - a) / dt / n2;
                [s * g[0], s * g[1], s * g[2]]
            }
        })
        .collect();
    VectorField::from_raw(*before.grid(), data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResidual {
    /// `int |(I - nu nu^T) v|^2 eps |grad u|^2`
    pub tangential: f64,
    /// `int |v|^2 eps |grad u|^2`
    pub total: f64,
}

/// Tangential part of an arbitrary velocity field against the normal of `u`.
pub fn projection_residual_of(v: &VectorField, u: &ScalarField, epsilon: f64) -> ProjectionResidual {
    let grad = gradient(u);
    let (tangential, total) = v
        .values()
        .iter()
        .zip(grad.values())
        .map(|(vi, g)| {
            let nu = unit_or_fallback(g);
            let weight = epsilon * dot(g, g);
            let vn = dot(vi, &nu);
            let p = [vi[0] - vn * nu[0], vi[1] - vn * nu[1], vi[2] - vn * nu[2]];
            (weight * dot(&p, &p), weight * dot(vi, vi))
        })
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let vol = u.grid().cell_volume();
    ProjectionResidual { tangential: tangential * vol, total: total * vol }
}

pub fn projection_residual(before: &ScalarField, after: &ScalarField, dt: f64, epsilon: f64) -> ProjectionResidual {
    let mid = before.lin_comb(0.5, after, 0.5);
    projection_residual_of(&diffuse_velocity(before, after, dt), &mid, epsilon)
}

/// A vector test field sampled at cell centers together with its Jacobian
/// `jacobian[i][j] = d eta_i / d x_j`.
#[derive(Debug, Clone)]
pub struct VectorTestField {
    pub value: Vec<Point>,
    pub jacobian: Vec<[[f64; 3]; 3]>,
}

impl VectorTestField {
    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> (Point, [[f64; 3]; 3])) -> Self {
        let (value, jacobian) = (0..grid.len()).map(|i| f(grid.center(i))).unzip();
        Self { value, jacobian }
    }

    /// `eta = phi (x - center)` for a scalar bump `phi`.
    pub fn radial_from_bump(grid: &Grid, bump: &SpatialBump) -> Self {
        let c = bump.center();
        let mut value = vec![[0.0; 3]; grid.len()];
        let mut jacobian = vec![[[0.0; 3]; 3]; grid.len()];
        for s in bump.samples() {
            let x = grid.center(s.index);
            let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
            value[s.index] = [s.value * d[0], s.value * d[1], s.value * d[2]];
            let mut jac = [[0.0; 3]; 3];
            for (i, row) in jac.iter_mut().enumerate().take(grid.dim()) {
                for (j, entry) in row.iter_mut().enumerate().take(grid.dim()) {
                    *entry = d[i] * s.gradient[j] + if i == j { s.value } else { 0.0 };
                }
            }
            jacobian[s.index] = jac;
        }
        Self { value, jacobian }
    }
}

/// `int (div eta - nu . (D eta) nu) e`
pub fn first_variation(u: &ScalarField, epsilon: f64, eta: &VectorTestField) -> f64 {
    let grid = u.grid();
    let dim = grid.dim();
    let e = measure_density(u, epsilon);
    let nu = diffuse_normal(u);
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| {
            let jac = &eta.jacobian[i];
            let n = &nu.values()[i];
            let mut div = 0.0;
            let mut normal = 0.0;
            for a in 0..dim {
                div += jac[a][a];
                for b in 0..dim {
                    normal += n[a] * jac[a][b] * n[b];
                }
            }
            (div - normal) * e.values()[i]
        })
        .collect();
    sum_ordered(&terms, |v| v) * grid.cell_volume()
}

/// `|delta V(eta) + int eta . w grad u|`, which vanishes with the discrepancy.
pub fn curvature_pairing_residual(u: &ScalarField, epsilon: f64, eta: &VectorTestField) -> f64 {
    let w = chemical_potential(u, epsilon);
    let grad = gradient(u);
    let pairing: Vec<f64> = (0..u.grid().len())
        .map(|i| w.values()[i] * dot(&eta.value[i], &grad.values()[i]))
        .collect();
    let pairing = sum_ordered(&pairing, |v| v) * u.grid().cell_volume();
    (first_variation(u, epsilon, eta) + pairing).abs()
}

/// `int w^2 / eps`
pub fn willmore_tally(u: &ScalarField, epsilon: f64) -> f64 {
    let w = chemical_potential(u, epsilon);
    integrate_product(&w, &w) / epsilon
}

/// Per-step defect of `2 dE/dt = int g^2/eps - int (eps u_t^2 + w^2/eps)`
/// with `psi = 1`, normalized by `E + dt (Lambda' + D')`, the size of the
/// terms being balanced. Plain `E` is useless once a phase has been expelled.
pub fn dissipation_residual(
    before: &ScalarField,
    after: &ScalarField,
    dt: f64,
    epsilon: f64,
    g: &ScalarField,
    w: &ScalarField,
) -> f64 {
    let e0 = energy(before, epsilon);
    let e1 = energy(after, epsilon);
    let dut = after.lin_comb(1.0 / dt, before, -1.0 / dt);
    let lambda_rate = integrate_product(g, g) / epsilon;
    let diss_rate = epsilon * integrate_product(&dut, &dut) + integrate_product(w, w) / epsilon;
    let defect = (2.0 * (e1 - e0) - dt * (lambda_rate - diss_rate)).abs();
    let scale = e0 + dt * (lambda_rate + diss_rate);
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// Relative defect of the telescoped balance `E(T) + D/2 = E(0) + Lambda/2`,
/// measured against the energy available to the run, `E(0) + Lambda/2`.
pub fn cumulative_closure(e0: f64, e_t: f64, lambda: f64, dissipation: f64) -> f64 {
    let defect = (e_t + 0.5 * dissipation - e0 - 0.5 * lambda).abs();
    let scale = e0 + 0.5 * lambda;
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

/// `sup mu(B_R(x)) / R^(n-1)` over the given centers and radii.
pub fn density_ratio(u: &ScalarField, epsilon: f64, centers: &[Point], radii: &[f64]) -> f64 {
    let e = measure_density(u, epsilon);
    let power = u.grid().dim() as f64 - 1.0;
    let mut best: f64 = 0.0;
    for c in centers {
        for &r in radii {
            let m = ball_mass(&e, *c, r);
            if m.reliable {
                best = best.max(m.mass / r.powf(power));
            }
        }
    }
    best
}

/// Radii `2 eps, 4 eps, ...` up to a quarter of the shortest box side.
pub fn density_radii(grid: &Grid, epsilon: f64) -> Vec<f64> {
    let cap = grid.extent().iter().cloned().fold(f64::INFINITY, f64::min) / 4.0;
    let mut out = Vec::new();
    let mut r = 2.0 * epsilon;
    while r <= cap {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Up to `count` cell centers where `|u| < 1/2`, evenly thinned.
pub fn interface_centers(u: &ScalarField, count: usize) -> Vec<Point> {
    let near: Vec<usize> = (0..u.grid().len()).filter(|&i| u.values()[i].abs() < 0.5).collect();
    if near.is_empty() || count == 0 {
        return Vec::new();
    }
    let stride = near.len().div_ceil(count);
    near.iter().step_by(stride).map(|&i| u.grid().center(i)).collect()
}

/// Samples `int |G(u(t1)) - G(u(t2))|` against the bound
/// `sqrt(2 sup E * int int eps u_t^2) sqrt|t1 - t2|`.
#[derive(Debug, Clone, Default)]
pub struct HolderCheck {
    frames: Vec<(f64, ScalarField)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport {
    /// Largest observed `int |G(u1) - G(u2)| / sqrt|t1 - t2|`.
    pub observed: f64,
    pub constant: f64,
    pub pairs: usize,
}

impl HolderCheck {
    pub fn push(&mut self, t: f64, u: &ScalarField) {
        self.frames.push((t, u.map(g_antiderivative)));
    }

    pub fn report(&self, max_energy: f64, kinetic: f64) -> HolderReport {
        let mut observed: f64 = 0.0;
        let mut pairs = 0;
        for (i, (t1, g1)) in self.frames.iter().enumerate() {
            for (t2, g2) in &self.frames[i + 1..] {
                let dt = (t2 - t1).abs();
                if dt > 0.0 {
                    observed = observed.max(g1.lin_comb(1.0, g2, -1.0).l1_norm() / dt.sqrt());
                    pairs += 1;
                }
            }
        }
        HolderReport { observed, constant: (2.0 * max_energy * kinetic).sqrt(), pairs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{c0, well_prepared_initial, Geometry, ProfileSpec};
    use std::f64::consts::PI;

    fn planar(n: usize, eps: f64) -> ScalarField {
        let grid = Grid::new(&[1.0], &[n]).unwrap();
        let spec = ProfileSpec {
            epsilon: eps,
            geometry: Geometry::Plane { point: [0.5, 0.0, 0.0], normal: [1.0, 0.0, 0.0] },
        };
        well_prepared_initial(&spec, &grid).unwrap()
    }

    fn circle(n: usize, eps: f64, r: f64) -> ScalarField {
        let grid = Grid::cube(2, 1.0, n).unwrap();
        let spec = ProfileSpec { epsilon: eps, geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: r } };
        well_prepared_initial(&spec, &grid).unwrap()
    }

    #[test]
    fn energy_of_wells_and_profile() {
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        assert_eq!(energy(&ScalarField::constant(grid, 1.0), 0.1), 0.0);
        let e = energy(&planar(2000, 0.02), 0.02);
        assert!((e - c0()).abs() < 1e-3, "{e}");
    }

    #[test]
    fn circle_energy_is_perimeter_times_c0() {
        let e = energy(&circle(256, 0.02, 0.3), 0.02);
        let target = c0() * 2.0 * PI * 0.3;
        assert!((e / target - 1.0).abs() < 0.02, "{e} vs {target}");
    }

    #[test]
    fn discrepancy_cases() {
        let eps = 0.02;
        let u = planar(2000, eps);
        let d = discrepancy(&u, eps);
        assert!(d.l1 <= 1e-3 * energy(&u, eps), "{}", d.l1);
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        let d0 = discrepancy(&ScalarField::zeros(grid), 0.1);
        assert!(d0.field.values().iter().all(|&v| (v + 2.5).abs() < 1e-14));
    }

    #[test]
    fn normals() {
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        let n = diffuse_normal(&ScalarField::constant(grid, 0.3));
        assert!(n.values().iter().all(|v| *v == FALLBACK_AXIS));
        let u = planar(400, 0.05);
        let n = diffuse_normal(&u);
        for (i, v) in n.values().iter().enumerate() {
            if u.values()[i].abs() < 0.9 {
                assert!((v[0] - 1.0).abs() < 1e-12);
            }
        }
        let u = circle(64, 0.04, 0.25);
        let n = diffuse_normal(&u);
        let grid = *u.grid();
        for i in 0..grid.len() {
            if u.values()[i].abs() < 0.9 {
                let x = grid.center(i);
                let inward = [0.5 - x[0], 0.5 - x[1], 0.0];
                assert!(dot(&n.values()[i], &inward) > 0.0);
            }
        }
    }

    #[test]
    fn stationary_velocity_and_projection() {
        let u = circle(32, 0.04, 0.25);
        let v = diffuse_velocity(&u, &u, 0.01);
        assert!(v.values().iter().all(|x| *x == [0.0; 3]));
        let p = projection_residual(&u, &u, 0.01, 0.1);
        assert_eq!(p.tangential, 0.0);
        assert_eq!(p.total, 0.0);
    }

    #[test]
    fn projection_detects_tangential_motion() {
        let u = circle(64, 0.04, 0.25);
        let u2 = circle(64, 0.04, 0.24);
        let p = projection_residual(&u, &u2, 1e-3, 0.04);
        assert!(p.tangential <= 1e-20 * p.total);
        assert!(p.total > 0.0);
        let grid = *u.grid();
        let swirl = VectorField::from_fn(grid, |x| [-(x[1] - 0.5), x[0] - 0.5, 0.0]);
        let q = projection_residual_of(&swirl, &u, 0.04);
        assert!(q.tangential > 0.1 * q.total);
    }

    #[test]
    fn first_variation_of_circle() {
        let eps = 0.02;
        let r = 0.3;
        let u = circle(256, eps, r);
        let grid = *u.grid();
        // eta = x - center near the circle: delta V = c0 * length
        let eta = VectorTestField::from_fn(&grid, |x| {
            ([x[0] - 0.5, x[1] - 0.5, 0.0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]])
        });
        let dv = first_variation(&u, eps, &eta);
        let target = c0() * 2.0 * PI * r;
        assert!((dv / target - 1.0).abs() < 0.05, "{dv} vs {target}");
        assert!(curvature_pairing_residual(&u, eps, &eta) < 0.05 * target);
    }

    #[test]
    fn pairing_vanishes_on_constants() {
        let grid = Grid::cube(2, 1.0, 16).unwrap();
        let u = ScalarField::constant(grid, 1.0);
        let eta = VectorTestField::from_fn(&grid, |x| ([x[1], x[0], 0.0], [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]]));
        assert_eq!(first_variation(&u, 0.1, &eta), 0.0);
        assert_eq!(curvature_pairing_residual(&u, 0.1, &eta), 0.0);
    }

    #[test]
    fn willmore_of_circle() {
        let eps = 0.02;
        let r = 0.3;
        let w = willmore_tally(&circle(256, eps, r), eps);
        let target = c0() * 2.0 * PI * r / (r * r);
        assert!((w / target - 1.0).abs() < 0.1, "{w} vs {target}");
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        assert_eq!(willmore_tally(&ScalarField::constant(grid, -1.0), 0.1), 0.0);
    }

    #[test]
    fn dissipation_residual_at_equilibrium() {
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        let u = ScalarField::constant(grid, 1.0);
        let z = ScalarField::zeros(grid);
        assert_eq!(dissipation_residual(&u, &u, 0.01, 0.1, &z, &z), 0.0);
        assert_eq!(cumulative_closure(1.0, 1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn closure_reference_values() {
        // E drops 1 -> 0.5 with D = 1.02: defect 0.01 against 1
        assert!((cumulative_closure(1.0, 0.5, 0.0, 1.02) - 0.01).abs() < 1e-15);
        // forced: E 1 -> 1.2, Lambda 1, D 0.6: balanced
        assert!(cumulative_closure(1.0, 1.2, 1.0, 0.6) < 1e-15);
        assert!((cumulative_closure(0.0, 0.1, 0.0, 0.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn density_ratio_of_circle() {
        let eps = 0.02;
        let u = circle(256, eps, 0.3);
        let grid = *u.grid();
        let radii = density_radii(&grid, eps);
        assert_eq!(radii, vec![0.04, 0.08, 0.16]);
        let centers = interface_centers(&u, 32);
        let ratio = density_ratio(&u, eps, &centers, &radii);
        // a flat piece of curve has ratio 2 c0
        assert!(ratio > 1.5 * c0() && ratio < 3.0 * c0(), "{ratio}");
    }

    #[test]
    fn holder_check_counts_pairs() {
        let u = circle(32, 0.04, 0.25);
        let mut h = HolderCheck::default();
        h.push(0.0, &u);
        h.push(0.1, &u);
        h.push(0.2, &u.scale(0.9));
        let rep = h.report(1.0, 1.0);
        assert_eq!(rep.pairs, 3);
        assert!(rep.observed > 0.0);
        assert!((rep.constant - 2f64.sqrt()).abs() < 1e-15);
    }
}
