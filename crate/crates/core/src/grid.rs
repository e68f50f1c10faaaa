//! Uniform cell-centered grids on rectangular boxes `[0, L_1] x ... x [0, L_n]`,
//! the fields sampled on them, and the finite-difference operators used by
//! every solver and diagnostic.
//!
//! Boundary semantics are homogeneous Neumann throughout. The Laplacian uses
//! mirror ghost cells across each face (`u[-1] = u[0]`), which makes the
//! discrete divergence theorem exact: the Laplacian of any field sums to zero.
//! The centered gradient reflects about the boundary cell itself, so its normal
//! component vanishes on boundary cells.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Points are always stored with three coordinates; unused axes are zero.
pub type Point = [f64; 3];

const SPACING_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 3],
    extent: [f64; 3],
    spacing: f64,
}

impl Grid {
    /// Builds a grid from per-axis physical lengths and cell counts.
    pub fn new(extent: &[f64], cells: &[usize]) -> Result<Self> {
        let dim = extent.len();
        if dim == 0 || dim > 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if cells.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} extents but {} cell counts",
                dim,
                cells.len()
            )));
        }
        if let Some(n) = cells.iter().find(|&&n| n < 4) {
            return Err(Error::InvalidGrid(format!("cell counts must be >= 4, got {n}")));
        }
        if extent.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidGrid("extents must be finite and positive".into()));
        }
        let spacing = extent[0] / cells[0] as f64;
        for a in 1..dim {
            let h = extent[a] / cells[a] as f64;
            if ((h - spacing) / spacing).abs() > SPACING_RTOL {
                return Err(Error::InvalidGrid(format!(
                    "spacing must be uniform: axis 0 has {spacing}, axis {a} has {h}"
                )));
            }
        }
        let mut c = [1usize; 3];
        let mut e = [spacing; 3];
        c[..dim].copy_from_slice(cells);
        e[..dim].copy_from_slice(extent);
        Ok(Self { dim, cells: c, extent: e, spacing })
    }

    /// Square/cubic box of side `length` with `n` cells per axis.
    pub fn cube(dim: usize, length: f64, n: usize) -> Result<Self> {
        Self::new(&vec![length; dim], &vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis cell counts for the active axes.
    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    /// Per-axis lengths for the active axes.
    pub fn extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.extent().iter().product()
    }

    pub(crate) fn raw_cells(&self) -> [usize; 3] {
        self.cells
    }

    /// Linear index stride of each axis.
    pub(crate) fn strides(&self) -> [usize; 3] {
        [1, self.cells[0], self.cells[0] * self.cells[1]]
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.cells[0] * (ijk[1] + self.cells[1] * ijk[2])
    }

    pub fn coords(&self, index: usize) -> [usize; 3] {
        let i = index % self.cells[0];
        let rest = index / self.cells[0];
        [i, rest % self.cells[1], rest / self.cells[1]]
    }

    /// Physical position of the cell center.
    pub fn center(&self, index: usize) -> Point {
        let c = self.coords(index);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = (c[a] as f64 + 0.5) * self.spacing;
        }
        p
    }

    /// Center of the whole box.
    pub fn midpoint(&self) -> Point {
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = 0.5 * self.extent[a];
        }
        p
    }

    /// Cell containing `p` (clamped into the box).
    pub fn locate(&self, p: Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let i = (p[a] / self.spacing).floor();
            c[a] = i.clamp(0.0, (self.cells[a] - 1) as f64) as usize;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    /// Wraps samples; rejects wrong lengths and non-finite values.
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::FieldMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { grid, data })
    }

    /// No finiteness check; used on hot paths whose inputs were already validated.
    pub(crate) fn from_raw(grid: Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self { grid, data }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, data: vec![value; grid.len()] }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(Point) -> f64 + Sync,
    {
        let data = (0..grid.len()).into_par_iter().map(|i| f(grid.center(i))).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let data = self.data.par_iter().map(|&v| f(v)).collect();
        Self { grid: self.grid, data }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let data = self.data.par_iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, data }
    }

    /// `a * self + b * other`
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        self.zip_map(other, |x, y| a * x + b * y)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|x| a * x)
    }

    /// L2 norm with the cell-volume weight.
    pub fn l2_norm(&self) -> f64 {
        (sum_ordered(&self.data, |v| v * v) * self.grid.cell_volume()).sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        sum_ordered(&self.data, f64::abs) * self.grid.cell_volume()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    data: Vec<[f64; 3]>,
}

impl VectorField {
    pub fn new(grid: Grid, data: Vec<[f64; 3]>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::FieldMismatch(format!(
                "expected {} vectors, got {}",
                grid.len(),
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { grid, data })
    }

    pub(crate) fn from_raw(grid: Grid, data: Vec<[f64; 3]>) -> Self {
        Self { grid, data }
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(Point) -> [f64; 3] + Sync,
    {
        let data = (0..grid.len()).into_par_iter().map(|i| f(grid.center(i))).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField::from_raw(self.grid, self.data.iter().map(|v| v[axis]).collect())
    }

    pub fn norm(&self) -> ScalarField {
        ScalarField::from_raw(self.grid, self.data.iter().map(|v| dot(v, v).sqrt()).collect())
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Sequential sum in index order so reductions are reproducible bit-for-bit.
pub(crate) fn sum_ordered<F: Fn(f64) -> f64>(data: &[f64], f: F) -> f64 {
    data.iter().map(|&v| f(v)).sum()
}

/// Neighbor indices along `axis` with the mirror ghost folded back onto the
/// boundary cell (`u[-1] = u[0]`, `u[N] = u[N-1]`).
#[inline]
pub(crate) fn mirror_neighbors(grid: &Grid, index: usize, axis: usize) -> (usize, usize) {
    let n = grid.cells[axis];
    let stride = grid.strides()[axis];
    let c = (index / stride) % n;
    let lo = if c == 0 { index } else { index - stride };
    let hi = if c + 1 == n { index } else { index + stride };
    (lo, hi)
}

/// Second-order central Laplacian with mirror-ghost Neumann boundaries.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let inv_h2 = 1.0 / (grid.spacing * grid.spacing);
    let src = f.values();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for axis in 0..grid.dim {
                let (lo, hi) = mirror_neighbors(&grid, i, axis);
                acc += src[lo] - 2.0 * src[i] + src[hi];
            }
            acc * inv_h2
        })
        .collect();
    ScalarField::from_raw(grid, data)
}

/// Centered-difference gradient. Boundary cells reflect about themselves, so
/// their normal component is exactly zero.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let inv_2h = 0.5 / grid.spacing;
    let src = f.values();
    let strides = grid.strides();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 3];
            for (axis, slot) in g.iter_mut().enumerate().take(grid.dim) {
                let n = grid.cells[axis];
                let c = (i / strides[axis]) % n;
                if c > 0 && c + 1 < n {
                    *slot = (src[i + strides[axis]] - src[i - strides[axis]]) * inv_2h;
                }
            }
            g
        })
        .collect();
    VectorField::from_raw(grid, data)
}

/// Per-cell `|grad f|^2` built from face differences: each cell takes the mean of
/// the squared one-sided differences on its two faces per axis, with boundary
/// faces contributing zero. Its integral equals `<-laplacian(f), f>` exactly,
/// which keeps discrete energies consistent with the Laplacian.
pub fn gradient_norm_sq(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let inv = 0.5 / (grid.spacing * grid.spacing);
    let src = f.values();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for axis in 0..grid.dim {
                let (lo, hi) = mirror_neighbors(&grid, i, axis);
                let a = src[hi] - src[i];
                let b = src[i] - src[lo];
                acc += a * a + b * b;
            }
            acc * inv
        })
        .collect();
    ScalarField::from_raw(grid, data)
}

/// Midpoint-rule integral over the box.
pub fn integrate(f: &ScalarField) -> f64 {
    sum_ordered(f.values(), |v| v) * f.grid().cell_volume()
}

/// Inner product `integral(f g)`.
pub fn integrate_product(f: &ScalarField, g: &ScalarField) -> f64 {
    assert_eq!(f.grid(), g.grid(), "fields live on different grids");
    f.values().iter().zip(g.values()).map(|(a, b)| a * b).sum::<f64>() * f.grid().cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallMass {
    pub mass: f64,
    /// False when the radius is below one grid spacing, where cell counting
    /// no longer resolves the ball.
    pub reliable: bool,
}

/// Mass of `density` in the ball `B_radius(center)`: sum over cells whose
/// centers lie in the ball, times the cell volume.
pub fn ball_mass(density: &ScalarField, center: Point, radius: f64) -> BallMass {
    assert!(radius > 0.0, "ball radius must be positive");
    let grid = *density.grid();
    let h = grid.spacing;
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        if a < grid.dim {
            let l = ((center[a] - radius) / h - 0.5).floor().max(0.0) as usize;
            let u = ((center[a] + radius) / h - 0.5).ceil();
            lo[a] = l.min(grid.cells[a] - 1);
            hi[a] = (u.max(0.0) as usize).min(grid.cells[a] - 1);
        }
    }
    let r2 = radius * radius;
    let src = density.values();
    let mut mass = 0.0;
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                let idx = grid.index([i, j, k]);
                let p = grid.center(idx);
                let d2: f64 = (0..grid.dim).map(|a| (p[a] - center[a]).powi(2)).sum();
                if d2 <= r2 {
                    mass += src[idx];
                }
            }
        }
    }
    BallMass { mass: mass * grid.cell_volume(), reliable: radius >= h }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn line(n: usize, l: f64) -> Grid {
        Grid::new(&[l], &[n]).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(&[1.0], &[3]).is_err());
        assert!(Grid::new(&[1.0, 2.0], &[16, 16]).is_err());
        assert!(Grid::new(&[1.0, -1.0], &[16, 16]).is_err());
        assert!(Grid::new(&[], &[]).is_err());
        assert!(Grid::new(&[1.0, 2.0], &[16, 32]).is_ok());
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = Grid::cube(2, 1.0, 8).unwrap();
        let lap = laplacian(&ScalarField::constant(g, 3.5));
        assert_eq!(lap.max_abs(), 0.0);
    }

    #[test]
    fn laplacian_exact_on_quadratic_interior() {
        let g = line(32, 2.0);
        let f = ScalarField::from_fn(g, |p| p[0] * p[0]);
        let lap = laplacian(&f);
        for (i, v) in lap.values().iter().enumerate().skip(1).take(30) {
            assert_relative_eq!(*v, 2.0, epsilon = 1e-9, max_relative = 1e-9);
            let _ = i;
        }
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let l = 1.0;
        let err = |n: usize| {
            let g = line(n, l);
            let f = ScalarField::from_fn(g, |p| (PI * p[0] / l).cos());
            let lap = laplacian(&f);
            let k2 = (PI / l).powi(2);
            lap.values()
                .iter()
                .zip(f.values())
                .map(|(a, b)| (a + k2 * b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(32), err(64), err(128));
        assert!((e1 / e2 - 4.0).abs() < 0.1, "ratio {}", e1 / e2);
        assert!((e2 / e3 - 4.0).abs() < 0.1, "ratio {}", e2 / e3);
    }

    #[test]
    fn gradient_affine_and_boundary() {
        let g = line(16, 1.0);
        let f = ScalarField::from_fn(g, |p| p[0]);
        let grad = gradient(&f);
        let v = grad.values();
        for x in &v[1..15] {
            assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        }
        assert_eq!(v[0][0], 0.0);
        assert_eq!(v[15][0], 0.0);
        let c = gradient(&ScalarField::constant(g, 2.0));
        assert!(c.values().iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn integrate_basics() {
        let g = Grid::new(&[2.0, 1.0], &[20, 10]).unwrap();
        assert_relative_eq!(integrate(&ScalarField::constant(g, 1.0)), 2.0, epsilon = 1e-14);
        assert_eq!(integrate(&ScalarField::zeros(g)), 0.0);
        let n = 64;
        let l = 3.0;
        let s = ScalarField::from_fn(line(n, l), |p| (2.0 * PI * p[0] / l).sin());
        assert!(integrate(&s).abs() <= 1e-12 * n as f64);
    }

    #[test]
    fn gradient_norm_sq_matches_laplacian_pairing() {
        let g = Grid::cube(2, 1.0, 24).unwrap();
        let f = ScalarField::from_fn(g, |p| (3.0 * p[0]).sin() * (p[1] * p[1] + 0.3 * p[0]));
        let lhs = integrate(&gradient_norm_sq(&f));
        let rhs = -integrate_product(&laplacian(&f), &f);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn ball_mass_cases() {
        let g = Grid::cube(2, 1.0, 64).unwrap();
        let one = ScalarField::constant(g, 1.0);
        let all = ball_mass(&one, [0.5, 0.5, 0.0], 2.0);
        assert_relative_eq!(all.mass, 1.0, epsilon = 1e-12);
        assert_eq!(ball_mass(&ScalarField::zeros(g), [0.5, 0.5, 0.0], 0.3).mass, 0.0);
        let r = 0.3;
        let b = ball_mass(&one, [0.5, 0.5, 0.0], r);
        let rel = (b.mass - PI * r * r).abs() / (PI * r * r);
        assert!(rel < 3.0 * g.spacing() / r, "rel err {rel}");
        assert!(b.reliable);
        assert!(!ball_mass(&one, [0.5, 0.5, 0.0], 0.5 * g.spacing()).reliable);
    }

    #[test]
    fn field_validation() {
        let g = line(8, 1.0);
        assert!(ScalarField::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(ScalarField::new(g, v), Err(Error::NonFiniteSample { index: 3 })));
    }
}
