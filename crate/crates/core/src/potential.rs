//! Quartic double-well potential `W(r) = (1 - r^2)^2 / 4` and the objects built
//! from it: the antiderivative `G` of `sqrt(2W)`, the surface-tension constant
//! `c0`, the optimal transition profile and well-prepared initial data.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::grid::{Grid, Point, ScalarField};

/// The fixed quartic double well.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DoubleWell;

impl DoubleWell {
    pub fn value(self, r: f64) -> f64 {
        w_value(r)
    }

    pub fn derivative(self, r: f64) -> f64 {
        w_prime(r)
    }

    pub fn second_derivative(self, r: f64) -> f64 {
        3.0 * r * r - 1.0
    }

    /// `sqrt(2 W(r)) = |1 - r^2| / sqrt(2)`
    pub fn sqrt_2w(self, r: f64) -> f64 {
        sqrt_2w(r)
    }
}

pub fn w_value(r: f64) -> f64 {
    let s = 1.0 - r * r;
    0.25 * s * s
}

pub fn w_prime(r: f64) -> f64 {
    r * r * r - r
}

pub fn sqrt_2w(r: f64) -> f64 {
    (1.0 - r * r).abs() / SQRT_2
}

/// `G(r) = integral_0^r sqrt(2W)`, constant outside `[-1, 1]`.
pub fn g_antiderivative(r: f64) -> f64 {
    let r = r.clamp(-1.0, 1.0);
    (r - r * r * r / 3.0) / SQRT_2
}

/// `c0 = integral_{-1}^{1} sqrt(2W) = 2 sqrt(2) / 3`.
pub fn c0() -> f64 {
    2.0 * SQRT_2 / 3.0
}

/// `q(z) = tanh(z / sqrt 2)`, the heteroclinic solution of `q'' = W'(q)`.
pub fn optimal_profile(z: f64) -> f64 {
    (z / SQRT_2).tanh()
}

pub fn optimal_profile_derivative(z: f64) -> f64 {
    let c = (z / SQRT_2).cosh();
    1.0 / (SQRT_2 * c * c)
}

/// Geometry of the initial phase `E = {u ~ +1}`, described through its signed
/// distance (positive inside `E`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Half-space `{(x - point) . normal > 0}`.
    Plane { point: Point, normal: Point },
    /// Disc (2D) or ball (3D).
    Ball { center: Point, radius: f64 },
}

impl Geometry {
    pub fn signed_distance(&self, dim: usize, x: Point) -> f64 {
        match *self {
            Geometry::Plane { point, normal } => {
                let norm: f64 = normal[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
                (0..dim).map(|a| (x[a] - point[a]) * normal[a]).sum::<f64>() / norm
            }
            Geometry::Ball { center, radius } => {
                let d: f64 = (0..dim).map(|a| (x[a] - center[a]).powi(2)).sum::<f64>().sqrt();
                radius - d
            }
        }
    }

    /// Checks that the interface stays at least `margin` away from every face
    /// of the box it crosses.
    pub fn check_margin(&self, grid: &Grid, margin: f64) -> Result<()> {
        let dim = grid.dim();
        match *self {
            Geometry::Plane { normal, .. } => {
                if normal[..dim].iter().all(|v| *v == 0.0) {
                    return Err(Error::Margin("plane normal is zero".into()));
                }
                let corners = 1usize << dim;
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for mask in 0..corners {
                    let mut x = [0.0; 3];
                    for a in 0..dim {
                        x[a] = if mask >> a & 1 == 1 { grid.extent()[a] } else { 0.0 };
                    }
                    let d = self.signed_distance(dim, x);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                if lo > -margin || hi < margin {
                    return Err(Error::Margin(format!(
                        "plane leaves only [{lo:.4}, {hi:.4}] of signed distance; need +-{margin:.4}"
                    )));
                }
            }
            Geometry::Ball { center, radius } => {
                if !(radius > 0.0) {
                    return Err(Error::Margin("ball radius must be positive".into()));
                }
                for a in 0..dim {
                    let room = (center[a] - radius).min(grid.extent()[a] - center[a] - radius);
                    if room < margin {
                        return Err(Error::Margin(format!(
                            "ball is {room:.4} from the boundary along axis {a}; need {margin:.4}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub epsilon: f64,
    pub geometry: Geometry,
}

/// Minimum distance, in units of epsilon, between the interface and the box.
pub const PROFILE_MARGIN: f64 = 5.0;

/// `u(x) = q(d(x) / epsilon)` with `d` the signed distance to the boundary of `E`.
pub fn well_prepared_initial(spec: &ProfileSpec, grid: &Grid) -> Result<ScalarField> {
    if !(spec.epsilon > 0.0) {
        return Err(Error::Margin("epsilon must be positive".into()));
    }
    spec.geometry.check_margin(grid, PROFILE_MARGIN * spec.epsilon)?;
    let dim = grid.dim();
    let geom = spec.geometry;
    let eps = spec.epsilon;
    Ok(ScalarField::from_fn(*grid, move |x| optimal_profile(geom.signed_distance(dim, x) / eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Adaptive Simpson quadrature, used only as an oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn well_values() {
        assert_eq!(w_value(0.0), 0.25);
        assert_eq!(w_prime(1.0), 0.0);
        assert_eq!(w_prime(-1.0), 0.0);
        assert_relative_eq!(w_prime(0.5), -0.375, epsilon = 1e-15);
        for r in [-1.3, -0.2, 0.0, 0.7] {
            assert!(w_value(r) >= 0.0);
            assert_eq!(w_value(r), w_value(-r));
        }
    }

    #[test]
    fn c0_matches_quadrature() {
        let q = adaptive_simpson(&|s| (2.0 * w_value(s)).sqrt(), -1.0, 1.0, 1e-13);
        assert_relative_eq!(c0(), q, epsilon = 1e-9);
        assert_relative_eq!(c0(), 0.9428090416, epsilon = 1e-9);
        assert_relative_eq!(c0(), 2.0 * g_antiderivative(1.0), epsilon = 1e-15);
        assert!(c0() > 0.0);
    }

    #[test]
    fn antiderivative_values() {
        assert_eq!(g_antiderivative(0.0), 0.0);
        assert_relative_eq!(g_antiderivative(1.0), 0.4714045, epsilon = 1e-7);
        let q = adaptive_simpson(&|s| (2.0 * w_value(s)).sqrt(), 0.0, 0.6, 1e-13);
        assert_relative_eq!(g_antiderivative(0.6), q, epsilon = 1e-11);
        assert_relative_eq!(g_antiderivative(1.0) - g_antiderivative(-1.0), c0(), epsilon = 1e-15);
        assert_eq!(g_antiderivative(1.5), g_antiderivative(1.0));
    }

    #[test]
    fn profile_properties() {
        assert_eq!(optimal_profile(0.0), 0.0);
        assert_relative_eq!(optimal_profile_derivative(0.0), 0.7071068, epsilon = 1e-7);
        let mut worst: f64 = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=2000 {
            let z = -10.0 + 0.01 * i as f64;
            let q = optimal_profile(z);
            assert!(q > prev);
            prev = q;
            worst = worst.max((optimal_profile_derivative(z) - sqrt_2w(q)).abs());
            assert_eq!(optimal_profile(-z), -q);
        }
        assert!(worst <= 1e-12, "equipartition defect {worst}");
        // finite-difference check of the derivative formula
        let z = 0.37;
        let fd = (optimal_profile(z + 1e-6) - optimal_profile(z - 1e-6)) / 2e-6;
        assert_relative_eq!(fd, optimal_profile_derivative(z), epsilon = 1e-9);
    }

    #[test]
    fn planar_profile_in_1d() {
        let grid = Grid::new(&[1.0], &[400]).unwrap();
        let eps = 0.02;
        let spec = ProfileSpec {
            epsilon: eps,
            geometry: Geometry::Plane { point: [0.5, 0.0, 0.0], normal: [1.0, 0.0, 0.0] },
        };
        let u = well_prepared_initial(&spec, &grid).unwrap();
        let h = grid.spacing();
        let tol = h / (SQRT_2 * eps);
        // the interface sits on the face between cells 199 and 200
        assert!(u.values()[199].abs() <= tol && u.values()[200].abs() <= tol);
        assert!(u.values()[0] < -0.999 && u.values()[399] > 0.999);
    }

    #[test]
    fn circle_center_saturates() {
        let grid = Grid::cube(2, 1.0, 64).unwrap();
        for eps in [0.04, 0.03, 0.02] {
            let spec = ProfileSpec {
                epsilon: eps,
                geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.3 },
            };
            spec.geometry.check_margin(&grid, PROFILE_MARGIN * eps).unwrap();
            let at_center = optimal_profile(0.3 / eps);
            // 1 - tanh(z/sqrt2) <= 2 exp(-sqrt2 z)
            assert!(1.0 - at_center <= 2.01 * (-(2f64.sqrt()) * 0.3 / eps).exp());
            assert!(1.0 - at_center < 1e-4);
            let u = well_prepared_initial(&spec, &grid).unwrap();
            assert!(u.max() <= 1.0);
        }
    }

    #[test]
    fn symmetric_geometry_gives_symmetric_field() {
        let grid = Grid::cube(2, 1.0, 40).unwrap();
        let spec = ProfileSpec {
            epsilon: 0.05,
            geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.2 },
        };
        let u = well_prepared_initial(&spec, &grid).unwrap();
        let v = u.values();
        for j in 0..40 {
            for i in 0..40 {
                let a = v[grid.index([i, j, 0])];
                assert!((a - v[grid.index([39 - i, j, 0])]).abs() <= 1e-12);
                assert!((a - v[grid.index([j, i, 0])]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn margin_violation_is_rejected() {
        let grid = Grid::cube(2, 1.0, 64).unwrap();
        let spec = ProfileSpec {
            epsilon: 0.05,
            geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.3 },
        };
        assert!(matches!(well_prepared_initial(&spec, &grid), Err(Error::Margin(_))));
        let plane = ProfileSpec {
            epsilon: 0.05,
            geometry: Geometry::Plane { point: [0.1, 0.0, 0.0], normal: [1.0, 0.0, 0.0] },
        };
        assert!(well_prepared_initial(&plane, &Grid::new(&[1.0], &[64]).unwrap()).is_err());
    }
}
