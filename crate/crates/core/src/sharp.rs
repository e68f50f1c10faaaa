//! Sharp-interface oracles and interface extraction.
//!
//! Sign conventions: the normal of the phase field points into `{u = +1}`,
//! positive forcing expands `{u = +1}`, and a ball `{u = +1}` of radius `r`
//! in `n` dimensions moves by `dr/dt = -(n - 1)/r + f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Point, ScalarField};

/// Radius of a ball under forced mean curvature flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOracle {
    pub dim: usize,
    pub r0: f64,
    /// Constant normal forcing, positive outward.
    pub forcing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialValue {
    Radius(f64),
    Extinct { time: f64 },
}

impl RadialValue {
    pub fn radius(self) -> Option<f64> {
        match self {
            RadialValue::Radius(r) => Some(r),
            RadialValue::Extinct { .. } => None,
        }
    }
}

const ORACLE_TOL: f64 = 1e-10;

impl RadialOracle {
    pub fn new(dim: usize, r0: f64, forcing: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::Stepper(format!("radial oracle needs dimension 2 or 3, got {dim}")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::Stepper(format!("initial radius must be positive, got {r0}")));
        }
        Ok(Self { dim, r0, forcing })
    }

    fn curvature(&self) -> f64 {
        (self.dim - 1) as f64
    }

    /// The radius where curvature and forcing balance, if any.
    pub fn stationary_radius(&self) -> Option<f64> {
        (self.forcing > 0.0).then(|| self.curvature() / self.forcing)
    }

    /// Closed-form time for the radius to fall from `from` to zero, valid
    /// while the ball shrinks (`f r < n - 1` on the way down).
    fn time_to_vanish(&self, from: f64) -> f64 {
        let a = self.curvature();
        let f = self.forcing;
        if f == 0.0 {
            return from * from / (2.0 * a);
        }
        // t = int_0^r rho / (a - f rho) d rho
        -from / f - a / (f * f) * (1.0 - f * from / a).ln()
    }

    /// Extinction time, or `None` if the ball never vanishes.
    pub fn extinction_time(&self) -> Option<f64> {
        match self.stationary_radius() {
            Some(rs) if self.r0 >= rs => None,
            _ => Some(self.time_to_vanish(self.r0)),
        }
    }

    pub fn radius_at(&self, t: f64) -> RadialValue {
        assert!(t >= 0.0, "radial oracle queried at negative time");
        let a = self.curvature();
        if self.forcing == 0.0 {
            let s = self.r0 * self.r0 - 2.0 * a * t;
            return if s > 0.0 {
                RadialValue::Radius(s.sqrt())
            } else {
                RadialValue::Extinct { time: self.r0 * self.r0 / (2.0 * a) }
            };
        }
        self.integrate(t)
    }

    /// Dormand–Prince 5(4) on `s = r^2`: `ds/dt = -2(n-1) + 2 f sqrt(s)`,
    /// used by [`Self::radius_at`] whenever the forcing is nonzero.
    pub fn integrate(&self, horizon: f64) -> RadialValue {
        let a = self.curvature();
        let f = self.forcing;
        let rhs = |s: f64| -2.0 * a + 2.0 * f * s.max(0.0).sqrt();
        let mut t = 0.0;
        let mut s = self.r0 * self.r0;
        let mut h = (horizon / 100.0).max(1e-12);
        // below this the closed form finishes the descent exactly
        let floor = 1e-6 * self.r0 * self.r0;
        while t < horizon {
            if rhs(s) < 0.0 && s < floor {
                let left = self.time_to_vanish(s.sqrt());
                return if t + left > horizon {
                    RadialValue::Radius((s + rhs(s) * (horizon - t)).max(0.0).sqrt())
                } else {
                    RadialValue::Extinct { time: t + left }
                };
            }
            h = h.min(horizon - t);
            let (next, err) = dopri_step(&rhs, s, h);
            let scale = ORACLE_TOL * s.max(floor);
            if err <= scale && next > 0.0 {
                t += h;
                s = next;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
            h *= if next <= 0.0 { 0.25 } else { factor };
        }
        RadialValue::Radius(s.sqrt())
    }
}

fn dopri_step(f: &impl Fn(f64) -> f64, y: f64, h: f64) -> (f64, f64) {
    let k1 = f(y);
    let k2 = f(y + h * (1.0 / 5.0) * k1);
    let k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    let k4 = f(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    let k5 = f(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    let k6 = f(y + h
        * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
            - 5103.0 / 18656.0 * k5));
    let y5 = y + h
        * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
            + 11.0 / 84.0 * k6);
    let k7 = f(y5);
    let y4 = y + h
        * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5
            + 187.0 / 2100.0 * k6
            + 1.0 / 40.0 * k7);
    (y5, (y5 - y4).abs())
}

/// Convenience wrapper over [`RadialOracle::radius_at`].
pub fn radial_solution(oracle: &RadialOracle, t: f64) -> RadialValue {
    oracle.radius_at(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let seg = |p: &[f64; 2], q: &[f64; 2]| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        let open: f64 = self.points.windows(2).map(|w| seg(&w[0], &w[1])).sum();
        match (self.closed, self.points.first(), self.points.last()) {
            (true, Some(a), Some(b)) if self.points.len() > 2 => open + seg(b, a),
            _ => open,
        }
    }
}

/// Zero level set of a phase field: polylines in 2D, crossing points along
/// grid lines in 1D and 3D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InterfaceCurve {
    Points(Vec<Point>),
    Polylines(Vec<Polyline>),
}

impl InterfaceCurve {
    pub fn is_empty(&self) -> bool {
        match self {
            InterfaceCurve::Points(p) => p.is_empty(),
            InterfaceCurve::Polylines(p) => p.is_empty(),
        }
    }

    /// Every point of the curve, in order.
    pub fn points(&self) -> Vec<Point> {
        match self {
            InterfaceCurve::Points(p) => p.clone(),
            InterfaceCurve::Polylines(lines) => {
                lines.iter().flat_map(|l| l.points.iter().map(|p| [p[0], p[1], 0.0])).collect()
            }
        }
    }
}

fn crossing(a: f64, b: f64) -> f64 {
    a / (a - b)
}

/// Zero crossings of `u` by linear interpolation between cell centers.
/// An interface-free field yields an empty curve.
pub fn extract_interface(u: &ScalarField) -> InterfaceCurve {
    let grid = u.grid();
    if grid.dim() == 2 {
        return InterfaceCurve::Polylines(marching_squares(u));
    }
    let v = u.values();
    let h = grid.spacing();
    let cells = grid.cells();
    let mut out = Vec::new();
    for i in 0..grid.len() {
        let ijk = grid.coords(i);
        let x = grid.center(i);
        for axis in 0..grid.dim() {
            if ijk[axis] + 1 >= cells[axis] {
                continue;
            }
            let mut nb = ijk;
            nb[axis] += 1;
            let j = grid.index(nb);
            if (v[i] > 0.0) != (v[j] > 0.0) {
                let mut p = x;
                p[axis] += h * crossing(v[i], v[j]);
                out.push(p);
            }
        }
    }
    InterfaceCurve::Points(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeKey {
    /// Between centers `(i, j)` and `(i + 1, j)`.
    H(usize, usize),
    /// Between centers `(i, j)` and `(i, j + 1)`.
    V(usize, usize),
}

fn marching_squares(u: &ScalarField) -> Vec<Polyline> {
    let grid = u.grid();
    let [nx, ny] = [grid.cells()[0], grid.cells()[1]];
    let h = grid.spacing();
    let v = u.values();
    let at = |i: usize, j: usize| v[grid.index([i, j, 0])];
    let point = |e: EdgeKey| -> [f64; 2] {
        match e {
            EdgeKey::H(i, j) => {
                let s = crossing(at(i, j), at(i + 1, j));
                [(i as f64 + 0.5 + s) * h, (j as f64 + 0.5) * h]
            }
            EdgeKey::V(i, j) => {
                let s = crossing(at(i, j), at(i, j + 1));
                [(i as f64 + 0.5) * h, (j as f64 + 0.5 + s) * h]
            }
        }
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            // corners counterclockwise from bottom-left
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let pos = c.map(|x| x > 0.0);
            let edges = [EdgeKey::H(i, j), EdgeKey::V(i + 1, j), EdgeKey::H(i, j + 1), EdgeKey::V(i, j)];
            // edge k joins corners k and k + 1
            let cut: Vec<usize> = (0..4).filter(|&k| pos[k] != pos[(k + 1) % 4]).collect();
            match cut.len() {
                0 => {}
                2 => segments.push((edges[cut[0]], edges[cut[1]])),
                4 => {
                    let center = c.iter().sum::<f64>() > 0.0;
                    // isolate the corners whose sign differs from the center
                    for k in 0..4 {
                        if pos[k] != center {
                            segments.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
                _ => unreachable!("a square has an even number of sign changes"),
            }
        }
    }
    link_segments(&segments, point)
}

fn link_segments(segments: &[(EdgeKey, EdgeKey)], point: impl Fn(EdgeKey) -> [f64; 2]) -> Vec<Polyline> {
    use std::collections::BTreeMap;
    let mut by_edge: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(s);
        by_edge.entry(*b).or_default().push(s);
    }
    let other = |s: usize, e: EdgeKey| if segments[s].0 == e { segments[s].1 } else { segments[s].0 };
    let next_segment = |e: EdgeKey, from: usize, used: &[bool]| {
        by_edge[&e].iter().copied().find(|&t| t != from && !used[t])
    };
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // open chains start at edges touched by a single segment
    let starts: Vec<(usize, EdgeKey)> = by_edge
        .iter()
        .filter(|(_, s)| s.len() == 1)
        .map(|(e, s)| (s[0], *e))
        .chain((0..segments.len()).map(|s| (s, segments[s].0)))
        .collect();
    for (first, start) in starts {
        if used[first] {
            continue;
        }
        let mut pts = vec![point(start)];
        let mut seg = first;
        let mut edge = start;
        let closed = loop {
            used[seg] = true;
            edge = other(seg, edge);
            if edge == start {
                break true;
            }
            pts.push(point(edge));
            match next_segment(edge, seg, &used) {
                Some(t) => seg = t,
                None => break false,
            }
        };
        lines.push(Polyline { points: pts, closed });
    }
    lines
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceMetrics {
    /// Total polyline length in 2D, number of crossings otherwise.
    pub measure: f64,
    pub radius: Option<f64>,
    pub center: Option<Point>,
    pub centroid: Point,
}

/// Length, least-squares circle or sphere, and centroid of a curve.
pub fn interface_metrics(curve: &InterfaceCurve, dim: usize) -> Result<InterfaceMetrics> {
    let pts = curve.points();
    if pts.is_empty() {
        return Err(Error::Fit("interface is empty".into()));
    }
    let n = pts.len() as f64;
    let mut centroid = [0.0; 3];
    for p in &pts {
        for a in 0..3 {
            centroid[a] += p[a] / n;
        }
    }
    let measure = match curve {
        InterfaceCurve::Polylines(lines) => lines.iter().map(Polyline::length).sum(),
        InterfaceCurve::Points(p) => p.len() as f64,
    };
    let fit = if dim >= 2 { fit_sphere(&pts, dim) } else { None };
    Ok(InterfaceMetrics { measure, radius: fit.map(|f| f.1), center: fit.map(|f| f.0), centroid })
}

/// Algebraic (Kasa) fit: least squares for `|x|^2 + d . x + e = 0`.
pub fn fit_sphere(points: &[Point], dim: usize) -> Option<(Point, f64)> {
    let m = dim + 1;
    if points.len() < m + 1 {
        return None;
    }
    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for p in points {
        let mut row = [0.0; 4];
        row[..dim].copy_from_slice(&p[..dim]);
        row[dim] = 1.0;
        let rhs = -(0..dim).map(|a| p[a] * p[a]).sum::<f64>();
        for r in 0..m {
            atb[r] += row[r] * rhs;
            for c in 0..m {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let sol = solve_small(&mut ata, &mut atb, m)?;
    let mut center = [0.0; 3];
    for a in 0..dim {
        center[a] = -0.5 * sol[a];
    }
    let r2 = (0..dim).map(|a| center[a] * center[a]).sum::<f64>() - sol[dim];
    (r2 > 0.0).then(|| (center, r2.sqrt()))
}

fn solve_small(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], m: usize) -> Option<[f64; 4]> {
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            let f = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSpeed {
    pub speed: f64,
    pub intercept: f64,
    pub rms: f64,
}

pub const MIN_FRONT_SAMPLES: usize = 10;

/// Least-squares slope of front position against time. With `{u = +1}` on
/// the low side of the front the slope is the expansion speed of `{u = +1}`.
/// Fails with a fit error when the RMS misfit exceeds `tolerance`.
pub fn front_speed(samples: &[(f64, f64)], tolerance: f64) -> Result<FrontSpeed> {
    if samples.len() < MIN_FRONT_SAMPLES {
        return Err(Error::Fit(format!(
            "front speed needs at least {MIN_FRONT_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let tm = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let xm = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::Fit("front samples share a single time".into()));
    }
    let stx: f64 = samples.iter().map(|s| (s.0 - tm) * (s.1 - xm)).sum();
    let speed = stx / stt;
    let intercept = xm - speed * tm;
    let rms = (samples.iter().map(|s| (s.1 - intercept - speed * s.0).powi(2)).sum::<f64>() / n).sqrt();
    if !(rms <= tolerance) {
        return Err(Error::Fit(format!("front positions misfit a line: rms {rms:.3e} > {tolerance:.3e}")));
    }
    Ok(FrontSpeed { speed, intercept, rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::potential::{well_prepared_initial, Geometry, ProfileSpec};
    use std::f64::consts::PI;

    #[test]
    fn unforced_closed_form() {
        let o = RadialOracle::new(2, 0.3, 0.0).unwrap();
        assert!((o.extinction_time().unwrap() - 0.045).abs() < 1e-15);
        assert_eq!(o.radius_at(0.05), RadialValue::Extinct { time: 0.045 });
        let o3 = RadialOracle::new(3, 0.3, 0.0).unwrap();
        assert!((o3.radius_at(0.01).radius().unwrap() - 0.05f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn integrator_matches_closed_form() {
        for dim in [2, 3] {
            let o = RadialOracle::new(dim, 0.3, 0.0).unwrap();
            let te = o.extinction_time().unwrap();
            for frac in [0.0, 0.2, 0.5, 0.9, 0.999] {
                let t = frac * te;
                let exact = o.radius_at(t).radius().unwrap();
                let r = o.integrate(t).radius().unwrap();
                assert!((r - exact).abs() <= 1e-9 * exact, "t={t}: {r} vs {exact}");
            }
            match o.integrate(1.1 * te) {
                RadialValue::Extinct { time } => assert!((time - te).abs() < 1e-9 * te),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn forced_extinction_time_matches_integration() {
        let o = RadialOracle::new(2, 0.3, 2.0).unwrap();
        let te = o.extinction_time().unwrap();
        match o.radius_at(te + 1e-3) {
            RadialValue::Extinct { time } => assert!((time - te).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        let r = o.radius_at(te - 1e-4).radius().unwrap();
        assert!(r > 0.0 && r < 0.02);
    }

    #[test]
    fn stationary_radius_is_unstable() {
        let o = RadialOracle::new(2, 0.3, 2.0).unwrap();
        assert_eq!(o.stationary_radius(), Some(0.5));
        let inside = RadialOracle::new(2, 0.49, 2.0).unwrap();
        let outside = RadialOracle::new(2, 0.51, 2.0).unwrap();
        assert!(inside.radius_at(1.0).radius().is_none_or(|r| r < 0.49));
        assert!(outside.radius_at(1.0).radius().unwrap() > 0.51);
        let at = RadialOracle::new(2, 0.5, 2.0).unwrap();
        assert!((at.radius_at(1.0).radius().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn growing_ball_follows_implicit_solution() {
        // t(r) = int_{r0}^r rho / (f rho - a) d rho
        let (a, f, r0) = (1.0, 2.0, 0.7);
        let t_of = |r: f64| (r - r0) / f + a / (f * f) * ((f * r - a) / (f * r0 - a)).ln();
        let o = RadialOracle::new(2, r0, f).unwrap();
        for r in [0.8, 1.0, 1.5] {
            let got = o.radius_at(t_of(r)).radius().unwrap();
            assert!((got - r).abs() < 1e-8 * r, "{got} vs {r}");
        }
    }

    #[test]
    fn one_dimensional_crossing() {
        let eps = 0.02;
        let grid = Grid::new(&[1.0], &[400]).unwrap();
        let x0 = 0.4321;
        let spec = ProfileSpec { epsilon: eps, geometry: Geometry::Plane { point: [x0, 0.0, 0.0], normal: [1.0, 0.0, 0.0] } };
        let u = well_prepared_initial(&spec, &grid).unwrap();
        let InterfaceCurve::Points(p) = extract_interface(&u) else { panic!() };
        assert_eq!(p.len(), 1);
        let h = grid.spacing();
        assert!((p[0][0] - x0).abs() <= h * h / eps);
    }

    #[test]
    fn circle_recovered() {
        let eps = 0.02;
        let grid = Grid::cube(2, 1.0, 256).unwrap();
        let spec = ProfileSpec { epsilon: eps, geometry: Geometry::Ball { center: [0.5, 0.5, 0.0], radius: 0.3 } };
        let u = well_prepared_initial(&spec, &grid).unwrap();
        let curve = extract_interface(&u);
        let InterfaceCurve::Polylines(lines) = &curve else { panic!() };
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        let m = interface_metrics(&curve, 2).unwrap();
        assert!((m.radius.unwrap() - 0.3).abs() < grid.spacing());
        assert!((m.measure / (2.0 * PI * 0.3) - 1.0).abs() < 0.005);
        assert!((m.centroid[0] - 0.5).abs() < 1e-3 && (m.centroid[1] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn sphere_recovered() {
        let eps = 0.05;
        let grid = Grid::cube(3, 1.0, 48).unwrap();
        let spec = ProfileSpec { epsilon: eps, geometry: Geometry::Ball { center: [0.5, 0.5, 0.5], radius: 0.25 } };
        let u = well_prepared_initial(&spec, &grid).unwrap();
        let m = interface_metrics(&extract_interface(&u), 3).unwrap();
        assert!((m.radius.unwrap() - 0.25).abs() < grid.spacing());
    }

    #[test]
    fn concentric_circles_and_segments() {
        let grid = Grid::cube(2, 1.0, 200).unwrap();
        let u = ScalarField::from_fn(grid, |x| {
            let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
            (r - 0.2) * (0.4 - r)
        });
        let curve = extract_interface(&u);
        let InterfaceCurve::Polylines(lines) = &curve else { panic!() };
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| l.closed));
        let m = interface_metrics(&curve, 2).unwrap();
        assert!((m.measure / (2.0 * PI * 0.6) - 1.0).abs() < 0.005);

        let line = ScalarField::from_fn(grid, |x| x[0] - 0.503);
        let InterfaceCurve::Polylines(seg) = extract_interface(&line) else { panic!() };
        assert_eq!(seg.len(), 1);
        assert!(!seg[0].closed);
        assert!((seg[0].length() - 1.0).abs() <= 1.01 * grid.spacing());
    }

    #[test]
    fn saddle_uses_center_sign() {
        let grid = Grid::cube(2, 1.0, 4).unwrap();
        // checkerboard with a positive average at the middle square
        let mut v = vec![-1.0; 16];
        v[grid.index([1, 1, 0])] = 2.0;
        v[grid.index([2, 2, 0])] = 2.0;
        let u = ScalarField::new(grid, v).unwrap();
        let InterfaceCurve::Polylines(lines) = extract_interface(&u) else { panic!() };
        // the two positive cells join into one region bounded by one loop
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
    }

    #[test]
    fn constant_field_has_no_interface() {
        let grid = Grid::cube(2, 1.0, 8).unwrap();
        let curve = extract_interface(&ScalarField::constant(grid, 0.5));
        assert!(curve.is_empty());
        assert!(interface_metrics(&curve, 2).is_err());
    }

    #[test]
    fn front_speed_fits() {
        let s: Vec<(f64, f64)> = (0..20).map(|k| (k as f64 * 0.01, 0.3 + 0.2 * k as f64 * 0.01)).collect();
        let f = front_speed(&s, 1e-9).unwrap();
        assert!((f.speed - 0.2).abs() < 1e-12);
        let still: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, 0.5)).collect();
        assert_eq!(front_speed(&still, 1e-12).unwrap().speed, 0.0);
        assert!(front_speed(&s[..5], 1.0).is_err());
        let garbage: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, if k % 2 == 0 { 0.0 } else { 1.0 })).collect();
        assert!(front_speed(&garbage, 0.01).is_err());
    }
}
