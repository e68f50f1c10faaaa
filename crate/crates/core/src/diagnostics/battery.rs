//! Seeded families of nonnegative space-time test functions
//! `zeta(t, x) = tau(t) phi(x)`, compactly supported inside the box and
//! inside `(0.1 T, 0.9 T)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, Point};

pub const DEFAULT_BATTERY_SIZE: usize = 12;

/// `b(s) = exp(1 - 1/(1 - s^2))` on `|s| < 1`, with its first two derivatives.
fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (1.0 - 1.0 / q).exp();
    let d1 = -2.0 * s / (q * q);
    let d2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
    (b, b * d1, b * (d1 * d1 + d2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpWindow {
    pub center: f64,
    pub half_width: f64,
}

impl BumpWindow {
    pub fn value(&self, t: f64) -> f64 {
        bump((t - self.center) / self.half_width).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        bump((t - self.center) / self.half_width).1 / self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSample {
    pub index: usize,
    pub value: f64,
    pub gradient: Point,
    pub laplacian: f64,
}

/// `phi(x) = prod_a b(s_a) * (1 + sum_a tilt_a s_a)`, `s_a = (x_a - c_a)/r_a`.
/// With `sum |tilt_a| <= 1/2` the function is nonnegative.
#[derive(Debug, Clone)]
pub struct SpatialBump {
    dim: usize,
    center: Point,
    radii: Point,
    tilt: Point,
    samples: Vec<BumpSample>,
    sup: f64,
}

impl SpatialBump {
    pub fn new(grid: &Grid, center: Point, radii: Point, tilt: Point) -> Self {
        let dim = grid.dim();
        assert!(tilt.iter().take(dim).map(|a| a.abs()).sum::<f64>() <= 0.5 + 1e-12, "tilt too large");
        assert!(radii.iter().take(dim).all(|&r| r > 0.0), "radii must be positive");
        let mut out = Self { dim, center, radii, tilt, samples: Vec::new(), sup: 0.0 };
        let lo = grid.locate(std::array::from_fn(|a| center[a] - radii[a]));
        let hi = grid.locate(std::array::from_fn(|a| center[a] + radii[a]));
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let index = grid.index([i, j, k]);
                    let (value, gradient, laplacian) = out.eval(grid.center(index));
                    if value > 0.0 {
                        out.sup = out.sup.max(value);
                        out.samples.push(BumpSample { index, value, gradient, laplacian });
                    }
                }
            }
        }
        out
    }

    /// Value, gradient and Laplacian at `x`.
    pub fn eval(&self, x: Point) -> (f64, Point, f64) {
        let mut b = [(1.0, 0.0, 0.0); 3];
        let mut s = [0.0; 3];
        for a in 0..self.dim {
            s[a] = (x[a] - self.center[a]) / self.radii[a];
            b[a] = bump(s[a]);
        }
        let prod = |skip: usize| (0..self.dim).filter(|&a| a != skip).map(|a| b[a].0).product::<f64>();
        let p: f64 = (0..self.dim).map(|a| b[a].0).product();
        let l = 1.0 + (0..self.dim).map(|a| self.tilt[a] * s[a]).sum::<f64>();
        let mut grad = [0.0; 3];
        let mut lap = 0.0;
        for a in 0..self.dim {
            let others = prod(a);
            let r = self.radii[a];
            grad[a] = b[a].1 / r * others * l + p * self.tilt[a] / r;
            lap += b[a].2 / (r * r) * others * l + 2.0 * b[a].1 / r * others * self.tilt[a] / r;
        }
        (p * l, grad, lap)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn samples(&self) -> &[BumpSample] {
        &self.samples
    }

    /// Largest sampled value.
    pub fn sup(&self) -> f64 {
        self.sup
    }
}

#[derive(Debug, Clone)]
pub struct TestFunction {
    pub window: BumpWindow,
    pub space: SpatialBump,
}

impl TestFunction {
    pub fn value(&self, t: f64, x: Point) -> f64 {
        self.window.value(t) * self.space.eval(x).0
    }

    pub fn sup_norm(&self) -> f64 {
        self.space.sup()
    }
}

#[derive(Debug, Clone)]
pub struct TestFunctionBattery {
    members: Vec<TestFunction>,
    seed: u64,
}

impl TestFunctionBattery {
    /// `count` members drawn from a ChaCha stream seeded with `seed`.
    pub fn seeded(grid: &Grid, horizon: f64, seed: u64, count: usize) -> Self {
        assert!(horizon > 0.0, "horizon must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = grid.dim();
        let members = (0..count)
            .map(|_| {
                let window = BumpWindow {
                    center: horizon * rng.gen_range(0.3..0.7),
                    half_width: horizon * rng.gen_range(0.1..0.2),
                };
                let mut center = [0.0; 3];
                let mut radii = [1.0; 3];
                let mut tilt = [0.0; 3];
                for a in 0..dim {
                    let l = grid.extent()[a];
                    radii[a] = l * rng.gen_range(0.2..0.45);
                    let margin = radii[a] + 0.05 * l;
                    center[a] = rng.gen_range(margin..=(l - margin));
                    tilt[a] = rng.gen_range(-0.5..0.5) / dim as f64;
                }
                TestFunction { window, space: SpatialBump::new(grid, center, radii, tilt) }
            })
            .collect();
        Self { members, seed }
    }

    pub fn members(&self) -> &[TestFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
