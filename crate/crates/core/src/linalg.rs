//! Linear solvers for the implicit diffusion parts of the schemes.
//!
//! Systems have the form `(shift I - scale div(M grad)) x = b` under
//! homogeneous Neumann conditions. Constant mobility is diagonalized by the
//! type-II cosine transform ([`CosineSolver`]); variable mobility goes through
//! Jacobi-preconditioned conjugate gradients ([`conjugate_gradient`]).

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::grid::{mirror_neighbors, Grid, ScalarField};

/// Per-face mobility. Entry `i` on axis `a` is the face between cell `i` and
/// its `+a` neighbour; the last face on each line is a wall and stays zero.
#[derive(Debug, Clone)]
pub struct FaceMobility {
    grid: Grid,
    faces: [Vec<f64>; 3],
}

impl FaceMobility {
    /// Arithmetic face average of a cell-centered mobility.
    pub fn from_cells(mobility: &ScalarField) -> Self {
        let grid = *mobility.grid();
        let m = mobility.values();
        let strides = grid.strides();
        let cells = grid.raw_cells();
        let faces = std::array::from_fn(|axis| {
            if axis >= grid.dim() {
                return Vec::new();
            }
            (0..grid.len())
                .map(|i| {
                    let c = (i / strides[axis]) % cells[axis];
                    if c + 1 < cells[axis] {
                        0.5 * (m[i] + m[i + strides[axis]])
                    } else {
                        0.0
                    }
                })
                .collect()
        });
        Self { grid, faces }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// `div(M grad x)` with zero flux through the walls; `M = 1` when `mobility` is `None`.
pub fn divergence_flux(x: &[f64], grid: &Grid, mobility: Option<&FaceMobility>, out: &mut [f64]) {
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let strides = grid.strides();
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        let mut acc = 0.0;
        for axis in 0..grid.dim() {
            let (lo, hi) = mirror_neighbors(grid, i, axis);
            match mobility {
                None => acc += x[hi] - 2.0 * x[i] + x[lo],
                Some(m) => {
                    let f = &m.faces[axis];
                    let right = f[i] * (x[hi] - x[i]);
                    let left = if lo == i { 0.0 } else { f[i - strides[axis]] * (x[i] - x[lo]) };
                    acc += right - left;
                }
            }
        }
        *o = acc * inv_h2;
    });
}

/// Symmetric positive definite operator `shift I - scale div(M grad)`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedDiffusion<'a> {
    pub grid: &'a Grid,
    pub shift: f64,
    pub scale: f64,
    pub mobility: Option<&'a FaceMobility>,
}

impl ShiftedDiffusion<'_> {
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        divergence_flux(x, self.grid, self.mobility, out);
        out.par_iter_mut().zip(x).for_each(|(o, &xi)| *o = self.shift * xi - self.scale * *o);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let inv_h2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let strides = self.grid.strides();
        (0..self.grid.len())
            .map(|i| {
                let mut d = 0.0;
                for axis in 0..self.grid.dim() {
                    let (lo, hi) = mirror_neighbors(self.grid, i, axis);
                    let (r, l) = match self.mobility {
                        None => (1.0, 1.0),
                        Some(m) => {
                            let f = &m.faces[axis];
                            (f[i], if lo == i { 0.0 } else { f[i - strides[axis]] })
                        }
                    };
                    if hi != i {
                        d += r;
                    }
                    if lo != i {
                        d += l;
                    }
                }
                self.shift + self.scale * d * inv_h2
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Stop when `|r| <= tol |b|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 5000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    // fixed chunking keeps the reduction order independent of thread count
    a.par_chunks(8192)
        .zip(b.par_chunks(8192))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Jacobi-preconditioned conjugate gradients; `x` holds the initial guess.
pub fn conjugate_gradient(
    op: &ShiftedDiffusion<'_>,
    b: &[f64],
    x: &mut [f64],
    settings: CgSettings,
) -> Result<CgReport> {
    let n = b.len();
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    r.par_iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 0..settings.max_iter {
        if res <= settings.tol {
            return Ok(CgReport { iterations: it, relative_residual: res });
        }
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        z.par_iter_mut().zip(&r).zip(&inv_diag).for_each(|((zi, ri), d)| *zi = ri * d);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        res = dot(&r, &r).sqrt() / b_norm;
    }
    if res <= settings.tol {
        return Ok(CgReport { iterations: settings.max_iter, relative_residual: res });
    }
    Err(Error::LinearSolve { iterations: settings.max_iter, residual: res })
}

/// Direct solver for `(I - c Lap) x = b` with the mirror-ghost Neumann
/// Laplacian, which the type-II cosine basis diagonalizes exactly.
pub struct CosineSolver {
    grid: Grid,
    plans: Vec<Arc<dyn TransformType2And3<f64>>>,
    /// Per-axis eigenvalues of the 1D Laplacian (nonpositive).
    eigen: Vec<Vec<f64>>,
}

impl std::fmt::Debug for CosineSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosineSolver").field("grid", &self.grid).finish()
    }
}

impl CosineSolver {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = DctPlanner::new();
        let h = grid.spacing();
        let plans = grid.cells().iter().map(|&n| planner.plan_dct2(n)).collect();
        let eigen = grid
            .cells()
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|k| {
                        let s = (PI * k as f64 / (2.0 * n as f64)).sin();
                        -4.0 * s * s / (h * h)
                    })
                    .collect()
            })
            .collect();
        Self { grid: *grid, plans, eigen }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Solves `(I - coef Lap) x = rhs` for `coef >= 0`.
    pub fn solve(&self, rhs: &ScalarField, coef: f64) -> ScalarField {
        assert_eq!(rhs.grid(), &self.grid, "rhs lives on a different grid");
        let mut data = rhs.values().to_vec();
        for axis in 0..self.grid.dim() {
            self.transform_axis(&mut data, axis, false);
        }
        let cells = self.grid.raw_cells();
        let eig = &self.eigen;
        data.par_iter_mut().enumerate().for_each(|(i, v)| {
            let c = [i % cells[0], (i / cells[0]) % cells[1], i / (cells[0] * cells[1])];
            let mut lam = 0.0;
            for (axis, e) in eig.iter().enumerate() {
                lam += e[c[axis]];
            }
            *v /= 1.0 - coef * lam;
        });
        for axis in 0..self.grid.dim() {
            self.transform_axis(&mut data, axis, true);
        }
        ScalarField::from_raw(self.grid, data)
    }

    /// Applies the DCT-II (or its inverse) along every line of `axis`.
    fn transform_axis(&self, data: &mut [f64], axis: usize, inverse: bool) {
        let plan = &self.plans[axis];
        let n = self.grid.cells()[axis];
        let scale = 2.0 / n as f64;
        let run = |line: &mut [f64], scratch: &mut Vec<f64>| {
            if inverse {
                plan.process_dct3_with_scratch(line, scratch);
                line.iter_mut().for_each(|v| *v *= scale);
            } else {
                plan.process_dct2_with_scratch(line, scratch);
            }
        };
        let scratch_len = plan.get_scratch_len();
        if axis == 0 {
            data.par_chunks_mut(n).for_each_init(
                || vec![0.0; scratch_len],
                |scratch, line| run(line, scratch),
            );
            return;
        }
        // gather lines of `axis` into contiguous rows, transform, scatter back
        let cells = self.grid.raw_cells();
        let stride = self.grid.strides()[axis];
        let lines = data.len() / n;
        let line_start = |l: usize| {
            // enumerate lines by the remaining two coordinates
            let inner = stride;
            let below = l % inner;
            let above = l / inner;
            below + above * inner * cells[axis]
        };
        let mut buf = vec![0.0; data.len()];
        {
            let src: &[f64] = data;
            buf.par_chunks_mut(n).enumerate().for_each_init(
                || vec![0.0; scratch_len],
                |scratch, (l, row)| {
                    let s = line_start(l);
                    for (k, r) in row.iter_mut().enumerate() {
                        *r = src[s + k * stride];
                    }
                    run(row, scratch);
                },
            );
        }
        for l in 0..lines {
            let s = line_start(l);
            let row = &buf[l * n..(l + 1) * n];
            for (k, r) in row.iter().enumerate() {
                data[s + k * stride] = *r;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn sample(grid: Grid) -> ScalarField {
        ScalarField::from_fn(grid, |p| (7.0 * p[0]).sin() + p[1] * p[1] - 0.3 * (5.0 * p[2]).cos() + 0.2)
    }

    #[test]
    fn cosine_solver_inverts_shifted_laplacian() {
        for grid in [
            Grid::new(&[1.0], &[37]).unwrap(),
            Grid::new(&[1.0, 0.5], &[24, 12]).unwrap(),
            Grid::new(&[1.0, 0.75, 0.5], &[16, 12, 8]).unwrap(),
        ] {
            let x = sample(grid);
            let coef = 3e-3;
            let b = x.lin_comb(1.0, &laplacian(&x), -coef);
            let solver = CosineSolver::new(&grid);
            let y = solver.solve(&b, coef);
            assert!(max_diff(y.values(), x.values()) < 1e-12, "dim {}", grid.dim());
            // coef = 0 is the identity
            assert!(max_diff(solver.solve(&x, 0.0).values(), x.values()) < 1e-13);
        }
    }

    #[test]
    fn cg_agrees_with_cosine_solver() {
        let grid = Grid::new(&[1.0, 0.5], &[32, 16]).unwrap();
        let b = sample(grid);
        let coef = 1e-3;
        let direct = CosineSolver::new(&grid).solve(&b, coef);
        let op = ShiftedDiffusion { grid: &grid, shift: 1.0, scale: coef, mobility: None };
        let mut x = vec![0.0; grid.len()];
        let rep = conjugate_gradient(&op, b.values(), &mut x, CgSettings::default()).unwrap();
        assert!(rep.iterations > 0);
        assert!(max_diff(&x, direct.values()) < 1e-10);
    }

    #[test]
    fn unit_mobility_matches_plain_laplacian() {
        let grid = Grid::new(&[1.0, 0.5], &[16, 8]).unwrap();
        let x = sample(grid);
        let m = FaceMobility::from_cells(&ScalarField::constant(grid, 1.0));
        let mut a = vec![0.0; grid.len()];
        let mut b = vec![0.0; grid.len()];
        divergence_flux(x.values(), &grid, Some(&m), &mut a);
        divergence_flux(x.values(), &grid, None, &mut b);
        assert!(max_diff(&a, &b) < 1e-9);
        assert!(max_diff(&b, laplacian(&x).values()) < 1e-9);
    }

    #[test]
    fn variable_mobility_flux_sums_to_zero() {
        let grid = Grid::new(&[1.0, 1.0], &[20, 20]).unwrap();
        let mob = ScalarField::from_fn(grid, |p| 1e-6 + (p[0] - 0.5).powi(2));
        let m = FaceMobility::from_cells(&mob);
        let x = sample(grid);
        let mut out = vec![0.0; grid.len()];
        divergence_flux(x.values(), &grid, Some(&m), &mut out);
        let total: f64 = out.iter().sum();
        assert!(total.abs() < 1e-9 * out.iter().map(|v| v.abs()).sum::<f64>());
    }

    #[test]
    fn cg_reports_non_convergence() {
        let grid = Grid::new(&[1.0, 1.0], &[32, 32]).unwrap();
        let b = sample(grid);
        let op = ShiftedDiffusion { grid: &grid, shift: 1e-3, scale: 1.0, mobility: None };
        let mut x = vec![0.0; grid.len()];
        let err = conjugate_gradient(&op, b.values(), &mut x, CgSettings { tol: 1e-14, max_iter: 3 });
        assert!(matches!(err, Err(Error::LinearSolve { iterations: 3, .. })));
    }
}
