//! Curvature-line nets: gridded invariant fields in principal coordinates and
//! the integrability conditions they must satisfy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{self, GeometricFrame, PointFrame};
use crate::surface::{ParamPoint, SurfaceModel, Vec4};
use crate::tolerances;

/// Column names of the ten nodal fields, in storage order.
pub const FIELD_NAMES: [&str; 10] = [
    "sqrtE", "sqrtG", "gamma1", "gamma2", "nu1", "nu2", "lambda", "mu", "beta1", "beta2",
];

/// Nodal fields over an `nu × nv` principal-coordinate rectangle; node
/// `(i, j)` sits at net coordinates `(i du, j dv)` and is stored at
/// `i * nv + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantFieldGrid {
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    /// `√E, √G, γ₁, γ₂, ν₁, ν₂, λ, μ, β₁, β₂`
    pub fields: [Vec<f64>; 10],
    pub positions: Option<Vec<Vec4>>,
    pub params: Option<Vec<ParamPoint>>,
    pub frames: Option<Vec<GeometricFrame>>,
    /// Largest mismatch of the traced curvature lines at a node.
    pub holonomy: f64,
}

pub const SQRT_E: usize = 0;
pub const SQRT_G: usize = 1;
pub const GAMMA1: usize = 2;
pub const GAMMA2: usize = 3;
pub const NU1: usize = 4;
pub const NU2: usize = 5;
pub const LAMBDA: usize = 6;
pub const MU: usize = 7;
pub const BETA1: usize = 8;
pub const BETA2: usize = 9;

impl InvariantFieldGrid {
    /// Grid with every field zero.
    pub fn zeros(nu: usize, nv: usize, du: f64, dv: f64) -> Result<Self> {
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {nu}x{nv}"
            )));
        }
        if !(du > 0.0 && dv > 0.0 && du.is_finite() && dv.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid steps must be positive, got {du}, {dv}"
            )));
        }
        Ok(InvariantFieldGrid {
            nu,
            nv,
            du,
            dv,
            fields: std::array::from_fn(|_| vec![0.0; nu * nv]),
            positions: None,
            params: None,
            frames: None,
            holonomy: 0.0,
        })
    }

    /// Grid whose ten fields are constant.
    pub fn constant(nu: usize, nv: usize, du: f64, dv: f64, values: [f64; 10]) -> Result<Self> {
        let mut g = Self::zeros(nu, nv, du, dv)?;
        for (field, v) in g.fields.iter_mut().zip(values) {
            field.fill(v);
        }
        Ok(g)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        FIELD_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|k| self.fields[k].as_slice())
    }

    pub fn get(&self, field: usize, i: usize, j: usize) -> f64 {
        self.fields[field][self.index(i, j)]
    }

    /// `γ₁, γ₂, ν₁, ν₂, λ, μ, β₁, β₂` at a node.
    pub fn node_invariants(&self, i: usize, j: usize) -> [f64; 8] {
        let k = self.index(i, j);
        std::array::from_fn(|m| self.fields[m + 2][k])
    }

    /// Shape, finiteness, `√E, √G > 0` and `μ ≠ 0`.
    pub fn validate(&self) -> Result<()> {
        let n = self.nu * self.nv;
        for (name, f) in FIELD_NAMES.iter().zip(&self.fields) {
            if f.len() != n {
                return Err(Error::InvalidArgument(format!(
                    "field {name} has {} values, expected {n}",
                    f.len()
                )));
            }
            if let Some(k) = f.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "field {name} is not finite at node ({}, {})",
                    k / self.nv,
                    k % self.nv
                )));
            }
        }
        for (field, name) in [(SQRT_E, "sqrtE"), (SQRT_G, "sqrtG")] {
            if let Some(k) = self.fields[field].iter().position(|&x| x <= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, node ({}, {})",
                    k / self.nv,
                    k % self.nv
                )));
            }
        }
        if let Some(k) = self.fields[MU].iter().position(|&x| x == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mu vanishes at node ({}, {})",
                k / self.nv,
                k % self.nv
            )));
        }
        if let Some(p) = &self.positions {
            if p.len() != n {
                return Err(Error::InvalidArgument("positions do not match the grid shape".into()));
            }
        }
        Ok(())
    }

    /// Derivative of a nodal field along `u` (`axis = 0`) or `v` (`axis = 1`).
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        grid_derivative(
            values,
            self.nu,
            self.nv,
            if axis == 0 { self.du } else { self.dv },
            axis,
        )
    }
}

/// Second-order derivative of a 1-D sample: central inside, one-sided
/// second order at the ends; first order if only two samples exist.
pub fn derivative_1d(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    match n {
        0 => vec![],
        1 => vec![0.0],
        2 => vec![(f[1] - f[0]) / h; 2],
        _ => (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if k == n - 1 {
                    (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
                } else {
                    (f[k + 1] - f[k - 1]) / (2.0 * h)
                }
            })
            .collect(),
    }
}

/// Fourth-order derivative of a 1-D sample (five-point stencils, one-sided
/// near the ends); falls back to [`derivative_1d`] below five samples.
pub fn derivative_1d_fourth(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n < 5 {
        return derivative_1d(f, h);
    }
    let d = 12.0 * h;
    (0..n)
        .map(|k| {
            if k == 0 {
                (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / d
            } else if k == 1 {
                (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / d
            } else if k == n - 1 {
                -(-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]) / d
            } else if k == n - 2 {
                -(-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]) / d
            } else {
                (f[k - 2] - 8.0 * f[k - 1] + 8.0 * f[k + 1] - f[k + 2]) / d
            }
        })
        .collect()
}

/// [`derivative_1d`] applied along one axis of a row-major `nu × nv` field.
pub fn grid_derivative(values: &[f64], nu: usize, nv: usize, h: f64, axis: usize) -> Vec<f64> {
    along_axis(values, nu, nv, axis, |line| derivative_1d(line, h))
}

/// [`derivative_1d_fourth`] applied along one axis.
pub fn grid_derivative_fourth(values: &[f64], nu: usize, nv: usize, h: f64, axis: usize) -> Vec<f64> {
    along_axis(values, nu, nv, axis, |line| derivative_1d_fourth(line, h))
}

fn along_axis(values: &[f64], nu: usize, nv: usize, axis: usize, d: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let mut out = vec![0.0; nu * nv];
    if axis == 0 {
        for j in 0..nv {
            let line: Vec<f64> = (0..nu).map(|i| values[i * nv + j]).collect();
            for (i, x) in d(&line).into_iter().enumerate() {
                out[i * nv + j] = x;
            }
        }
    } else {
        for i in 0..nu {
            out[i * nv..(i + 1) * nv].copy_from_slice(&d(&values[i * nv..(i + 1) * nv]));
        }
    }
    out
}

/// Tuning of [`build_net_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NetOptions {
    /// Step of the frame differences; default `1e-4` of the domain scale.
    pub frame_step: Option<f64>,
    /// Largest RK4 step along a curvature line; default half the net step.
    pub trace_step: Option<f64>,
}

/// Unit principal direction at `p` of the family closest to `reference`,
/// oriented along it, with its parameter components.
fn principal_direction(model: &SurfaceModel, p: ParamPoint, reference: &Vec4) -> Result<(Vec4, (f64, f64))> {
    let jet = model.evaluate_jet(p, 2)?;
    let pf = frame::point_frame(&jet)?;
    let (mut d, mut c) = if pf.x.dot(reference).abs() >= pf.y.dot(reference).abs() {
        (pf.x, pf.dx)
    } else {
        (pf.y, pf.dy)
    };
    if d.dot(reference) < 0.0 {
        d = -d;
        c = (-c.0, -c.1);
    }
    Ok((d, c))
}

struct TraceEnd {
    point: ParamPoint,
    dir: Vec4,
    comps: (f64, f64),
}

/// Follow the curvature line through `start` tangent to `dir` for arc length
/// `length` (negative goes backwards) in `steps` RK4 steps.
fn trace(model: &SurfaceModel, start: ParamPoint, dir: Vec4, length: f64, steps: usize) -> Result<TraceEnd> {
    let h = length / steps as f64;
    let mut p = start;
    let mut reference = dir;
    for _ in 0..steps {
        let field = |q: ParamPoint| principal_direction(model, q, &reference);
        let (d1, k1) = field(p)?;
        let (_, k2) = field(p.offset(0.5 * h * k1.0, 0.5 * h * k1.1))?;
        let (_, k3) = field(p.offset(0.5 * h * k2.0, 0.5 * h * k2.1))?;
        let (_, k4) = field(p.offset(h * k3.0, h * k3.1))?;
        p = p.offset(
            h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        reference = d1;
    }
    let (dir, comps) = principal_direction(model, p, &reference)?;
    Ok(TraceEnd { point: p, dir, comps })
}

fn steps_for(length: f64, max_step: f64) -> usize {
    ((length.abs() / max_step).ceil() as usize).max(2)
}

/// Intersection of the curvature line through `p` along `xdir` with the one
/// through `q` along `ydir`: returns both arc lengths, the end data and the
/// remaining mismatch.
fn intersect(
    model: &SurfaceModel,
    p: ParamPoint,
    xdir: (Vec4, (f64, f64)),
    q: ParamPoint,
    ydir: (Vec4, (f64, f64)),
    max_step: f64,
) -> Result<(f64, f64, TraceEnd, TraceEnd, f64)> {
    let (cx, cy) = (xdir.1, ydir.1);
    let solve = |a: (f64, f64), b: (f64, f64), r: (f64, f64)| -> Result<(f64, f64)> {
        // [a, -b] (s, t)ᵀ = r
        let det = -a.0 * b.1 + a.1 * b.0;
        if det.abs() < 1e-14 {
            return Err(Error::Integration("curvature lines are tangent".into()));
        }
        Ok(((-r.0 * b.1 + r.1 * b.0) / det, (a.0 * r.1 - a.1 * r.0) / det))
    };
    let (mut s, mut t) = solve(cx, cy, (q.u - p.u, q.v - p.v))?;
    let (ns, nt) = (steps_for(s, max_step), steps_for(t, max_step));
    let scale = 1.0 + p.u.abs().max(p.v.abs());
    let mut best: Option<(f64, f64, TraceEnd, TraceEnd, f64)> = None;
    for _ in 0..30 {
        let x = trace(model, p, xdir.0, s, ns)?;
        let y = trace(model, q, ydir.0, t, nt)?;
        let r = (x.point.u - y.point.u, x.point.v - y.point.v);
        let mismatch = r.0.hypot(r.1);
        let (dx, dy) = (x.comps, y.comps);
        let improved = best.as_ref().is_none_or(|b| mismatch < b.4);
        if improved {
            best = Some((s, t, x, y, mismatch));
        }
        if mismatch <= 1e-14 * scale || !improved {
            break;
        }
        let (ds, dt) = solve(dx, dy, (-r.0, -r.1))?;
        s += ds;
        t += dt;
    }
    best.ok_or_else(|| Error::Integration("no intersection found".into()))
}

/// Principal-coordinate net from `seed`: node `(i, j)` is where the
/// `y`-line through the `i`-th point of the `x`-line spine meets the `x`-line
/// through the `j`-th point of the `y`-line spine (spine points at arc
/// lengths `i du`, `j dv` from the seed).
pub fn build_net(
    model: &SurfaceModel,
    seed: ParamPoint,
    nu: usize,
    nv: usize,
    du: f64,
    dv: f64,
) -> Result<InvariantFieldGrid> {
    build_net_with(model, seed, nu, nv, du, dv, &NetOptions::default())
}

pub fn build_net_with(
    model: &SurfaceModel,
    seed: ParamPoint,
    nu: usize,
    nv: usize,
    du: f64,
    dv: f64,
    options: &NetOptions,
) -> Result<InvariantFieldGrid> {
    let mut grid = InvariantFieldGrid::zeros(nu, nv, du, dv)?;
    let max_step = options.trace_step.unwrap_or(0.5 * du.min(dv));
    let seed_frame = frame::point_frame(&model.evaluate_jet(seed, 2)?)?;
    let idx = |i: usize, j: usize| i * nv + j;
    let n = nu * nv;
    let mut nodes = vec![seed; n];
    let mut xdirs = vec![(seed_frame.x, seed_frame.dx); n];
    let mut ydirs = vec![(seed_frame.y, seed_frame.dy); n];
    // arc lengths of the segments ending at each node
    let mut arc_x = vec![0.0; n];
    let mut arc_y = vec![0.0; n];
    let mut holonomy: f64 = 0.0;

    for i in 1..nu {
        let k = idx(i - 1, 0);
        let end = trace(model, nodes[k], xdirs[k].0, du, steps_for(du, max_step))?;
        let y = principal_direction(model, end.point, &ydirs[k].0)?;
        let m = idx(i, 0);
        nodes[m] = end.point;
        xdirs[m] = (end.dir, end.comps);
        ydirs[m] = y;
        arc_x[m] = du;
    }
    for j in 1..nv {
        let k = idx(0, j - 1);
        let end = trace(model, nodes[k], ydirs[k].0, dv, steps_for(dv, max_step))?;
        let x = principal_direction(model, end.point, &xdirs[k].0)?;
        let m = idx(0, j);
        nodes[m] = end.point;
        ydirs[m] = (end.dir, end.comps);
        xdirs[m] = x;
        arc_y[m] = dv;
    }
    for i in 1..nu {
        for j in 1..nv {
            let (a, b) = (idx(i - 1, j), idx(i, j - 1));
            let (s, t, x, y, mismatch) = intersect(model, nodes[a], xdirs[a], nodes[b], ydirs[b], max_step)?;
            let m = idx(i, j);
            holonomy = holonomy.max(mismatch);
            nodes[m] = x.point;
            xdirs[m] = (x.dir, x.comps);
            ydirs[m] = (y.dir, y.comps);
            arc_x[m] = s;
            arc_y[m] = t;
        }
    }
    let diameter = {
        let (mut lo, mut hi) = ((f64::MAX, f64::MAX), (f64::MIN, f64::MIN));
        for p in &nodes {
            lo = (lo.0.min(p.u), lo.1.min(p.v));
            hi = (hi.0.max(p.u), hi.1.max(p.v));
        }
        (hi.0 - lo.0).hypot(hi.1 - lo.1)
    };
    let limit = tolerances::HOLONOMY * diameter;
    if holonomy > limit {
        return Err(Error::Holonomy {
            defect: holonomy,
            limit,
        });
    }
    grid.holonomy = holonomy;

    // metric: derivative of arc length along each coordinate line
    for j in 0..nv {
        let mut acc = 0.0;
        let arc: Vec<f64> = (0..nu)
            .map(|i| {
                acc += if i == 0 { 0.0 } else { arc_x[idx(i, j)] };
                acc
            })
            .collect();
        for (i, d) in derivative_1d_fourth(&arc, du).into_iter().enumerate() {
            grid.fields[SQRT_E][idx(i, j)] = d;
        }
    }
    for i in 0..nu {
        let mut acc = 0.0;
        let arc: Vec<f64> = (0..nv)
            .map(|j| {
                acc += if j == 0 { 0.0 } else { arc_y[idx(i, j)] };
                acc
            })
            .collect();
        for (j, d) in derivative_1d_fourth(&arc, dv).into_iter().enumerate() {
            grid.fields[SQRT_G][idx(i, j)] = d;
        }
    }

    // frames with x along the net and b continued from the seed
    let mut refs: Vec<PointFrame> = vec![seed_frame; n];
    for i in 0..nu {
        for j in 0..nv {
            if i == 0 && j == 0 {
                continue;
            }
            let prev = if i > 0 {
                refs[idx(i - 1, j)]
            } else {
                refs[idx(i, j - 1)]
            };
            let mut r = prev;
            r.x = xdirs[idx(i, j)].0;
            refs[idx(i, j)] = frame::aligned_point_frame(model, nodes[idx(i, j)], &r)?;
        }
    }
    let h = options.frame_step.unwrap_or_else(|| frame::default_frame_step(model));
    let frames: Vec<GeometricFrame> = (0..n)
        .into_par_iter()
        .map(|k| frame::geometric_frame_aligned(model, nodes[k], h, &refs[k]))
        .collect::<Result<_>>()?;
    for (k, f) in frames.iter().enumerate() {
        for (m, v) in f.invariants().into_iter().enumerate() {
            grid.fields[m + 2][k] = v;
        }
    }
    grid.positions = Some(nodes.iter().map(|&p| model.position_unchecked(p)).collect());
    grid.params = Some(nodes);
    grid.frames = Some(frames);
    Ok(grid)
}

/// Residuals of the six compatibility equations and the general-class tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub nu: usize,
    pub nv: usize,
    pub residuals: [Vec<f64>; 6],
    pub max_abs: [f64; 6],
    pub rms: [f64; 6],
    /// Node of the largest residual of each equation.
    pub worst_node: [(usize, usize); 6],
    /// Largest residuals of the two equations for `x(μ)` and `y(μ)`.
    pub mu_equations_max_abs: [f64; 2],
    pub general_class: bool,
    pub condition_4_3: bool,
}

impl IntegrabilityReport {
    pub fn max_residual(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }

    /// The equation and node with the largest residual.
    pub fn worst(&self) -> (usize, (usize, usize), f64) {
        let k = (0..6)
            .max_by(|&a, &b| self.max_abs[a].total_cmp(&self.max_abs[b]))
            .unwrap_or(0);
        (k, self.worst_node[k], self.max_abs[k])
    }
}

/// Quotients `μ_u / (2μγ₂ + ν₁β₂ - λβ₁)` and `μ_v / (2μγ₁ - λβ₂ + ν₂β₁)`
/// at every node, `None` where a denominator vanishes.
/// `μ_u` and `μ_v` use fourth-order stencils.
pub fn metric_quotients(grid: &InvariantFieldGrid) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let f = &grid.fields;
    let mu_u = grid_derivative_fourth(&f[MU], grid.nu, grid.nv, grid.du, 0);
    let mu_v = grid_derivative_fourth(&f[MU], grid.nu, grid.nv, grid.dv, 1);
    let scale = f[MU]
        .iter()
        .chain(&f[NU1])
        .chain(&f[NU2])
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    let tiny = tolerances::EQUAL * (1.0 + scale * scale);
    let quotient = |num: f64, den: f64| (den.abs() > tiny).then(|| num / den);
    let (mut qe, mut qg) = (Vec::new(), Vec::new());
    for k in 0..grid.len() {
        let (g1, g2, n1, n2, la, mu, b1, b2) = (
            f[GAMMA1][k],
            f[GAMMA2][k],
            f[NU1][k],
            f[NU2][k],
            f[LAMBDA][k],
            f[MU][k],
            f[BETA1][k],
            f[BETA2][k],
        );
        qe.push(quotient(mu_u[k], 2.0 * mu * g2 + n1 * b2 - la * b1));
        qg.push(quotient(mu_v[k], 2.0 * mu * g1 - la * b2 + n2 * b1));
    }
    (qe, qg)
}

/// Evaluate the compatibility equations on a grid. Never fails: bad data
/// shows up as large residuals.
pub fn check_integrability(grid: &InvariantFieldGrid) -> IntegrabilityReport {
    let f = &grid.fields;
    let d = |k: usize, axis: usize| grid.derivative(&f[k], axis);
    let (se_v, sg_u) = (d(SQRT_E, 1), d(SQRT_G, 0));
    let (g1_v, g2_u) = (d(GAMMA1, 1), d(GAMMA2, 0));
    let (la_u, la_v) = (d(LAMBDA, 0), d(LAMBDA, 1));
    let (n1_v, n2_u) = (d(NU1, 1), d(NU2, 0));
    let (b1_v, b2_u) = (d(BETA1, 1), d(BETA2, 0));
    let (mu_u, mu_v) = (d(MU, 0), d(MU, 1));
    let n = grid.len();
    let mut residuals: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; n]);
    let mut mu_eq = [0.0f64; 2];
    for k in 0..n {
        let (se, sg) = (f[SQRT_E][k], f[SQRT_G][k]);
        let (g1, g2, n1, n2, la, mu, b1, b2) = (
            f[GAMMA1][k],
            f[GAMMA2][k],
            f[NU1][k],
            f[NU2][k],
            f[LAMBDA][k],
            f[MU][k],
            f[BETA1][k],
            f[BETA2][k],
        );
        // x(φ) = φ_u / √E, y(φ) = φ_v / √G
        let r = [
            -g1 * se * sg - se_v[k],
            -g2 * se * sg - sg_u[k],
            n1 * n2 - (la * la + mu * mu) - (g2_u[k] / se + g1_v[k] / sg - (g1 * g1 + g2 * g2)),
            2.0 * la * g2 + mu * b1 - (n1 - n2) * g1 - (la_u[k] / se - n1_v[k] / sg),
            2.0 * la * g1 + mu * b2 + (n1 - n2) * g2 - (-n2_u[k] / se + la_v[k] / sg),
            g1 * b1 - g2 * b2 + (n1 - n2) * mu - (-b2_u[k] / se + b1_v[k] / sg),
        ];
        for (field, v) in residuals.iter_mut().zip(r) {
            field[k] = v;
        }
        mu_eq[0] = mu_eq[0].max((2.0 * mu * g2 + n1 * b2 - la * b1 - mu_u[k] / se).abs());
        mu_eq[1] = mu_eq[1].max((2.0 * mu * g1 - la * b2 + n2 * b1 - mu_v[k] / sg).abs());
    }
    let mut max_abs = [0.0; 6];
    let mut rms = [0.0; 6];
    let mut worst_node = [(0, 0); 6];
    for e in 0..6 {
        let (mut m, mut at, mut sq) = (0.0f64, 0usize, 0.0);
        for (k, v) in residuals[e].iter().enumerate() {
            sq += v * v;
            if v.abs() > m || !v.is_finite() {
                m = if v.is_finite() { v.abs() } else { f64::INFINITY };
                at = k;
            }
        }
        max_abs[e] = m;
        rms[e] = (sq / n as f64).sqrt();
        worst_node[e] = (at / grid.nv, at % grid.nv);
    }
    let mu_scale = f[MU].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tiny = tolerances::EQUAL * (1.0 + mu_scale);
    let general_class = mu_u.iter().zip(&mu_v).all(|(a, b)| a.abs() > tiny && b.abs() > tiny);
    let (qe, qg) = metric_quotients(grid);
    let condition_4_3 = general_class
        && qe.iter().chain(&qg).all(|q| q.is_none_or(|x| x > 0.0))
        && qe.iter().chain(&qg).any(|q| q.is_some());
    IntegrabilityReport {
        nu: grid.nu,
        nv: grid.nv,
        residuals,
        max_abs,
        rms,
        worst_node,
        mu_equations_max_abs: mu_eq,
        general_class,
        condition_4_3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use crate::meridian::{meridian_surface, MeridianSpec};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn derivative_stencils_are_exact_on_low_degree() {
        let f: Vec<f64> = (0..7).map(|k| (0.3 * k as f64).powi(2)).collect();
        for (k, d) in derivative_1d(&f, 0.3).into_iter().enumerate() {
            assert!((d - 2.0 * 0.3 * k as f64).abs() < 1e-12);
        }
        let g: Vec<f64> = (0..7).map(|k| (0.2 * k as f64).powi(4)).collect();
        for (k, d) in derivative_1d_fourth(&g, 0.2).into_iter().enumerate() {
            assert!((d - 4.0 * (0.2 * k as f64).powi(3)).abs() < 1e-12);
        }
    }

    #[test]
    fn clifford_torus_net_is_homogeneous() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        let g = build_net(&m, ParamPoint::new(0.0, 0.0), 21, 21, 0.1, 0.1).unwrap();
        let tol = 1e-7;
        for k in 0..g.len() {
            let at = |f: usize| g.fields[f][k];
            assert!((at(SQRT_E) - 1.0).abs() < tol && (at(SQRT_G) - 1.0).abs() < tol);
            assert!((at(NU1) - FRAC_1_SQRT_2).abs() < tol && (at(NU2) - FRAC_1_SQRT_2).abs() < tol);
            assert!(at(LAMBDA).abs() < tol && (at(MU).abs() - FRAC_1_SQRT_2).abs() < tol);
            for f in [GAMMA1, GAMMA2, BETA1, BETA2] {
                assert!(at(f).abs() < tol, "{} = {}", FIELD_NAMES[f], at(f));
            }
        }
        let r = check_integrability(&g);
        assert!(r.max_residual() < 1e-6, "{:?}", r.max_abs);
        assert!(!r.general_class);
    }

    #[test]
    fn constant_torus_grid_is_exactly_compatible() {
        let s = FRAC_1_SQRT_2;
        let g = InvariantFieldGrid::constant(9, 9, 0.1, 0.1, [1.0, 1.0, 0.0, 0.0, s, s, 0.0, s, 0.0, 0.0]).unwrap();
        let r = check_integrability(&g);
        assert!(r.max_residual() < 1e-15);
        assert!(!r.general_class && !r.condition_4_3);
    }

    #[test]
    fn perturbation_is_localized() {
        let s = FRAC_1_SQRT_2;
        let mut g = InvariantFieldGrid::constant(9, 9, 0.1, 0.1, [1.0, 1.0, 0.0, 0.0, s, s, 0.0, s, 0.0, 0.0]).unwrap();
        let k = g.index(4, 4);
        g.fields[NU1][k] += 0.01;
        let r = check_integrability(&g);
        assert!(r.max_abs[0] < 1e-15 && r.max_abs[1] < 1e-15);
        assert!(r.max_abs[2] > 1e-3);
        assert_eq!(r.worst_node[2], (4, 4));
        for e in [2, 3, 5] {
            for i in 0..9 {
                for j in 0..9 {
                    if (i as i32 - 4).abs() > 1 || (j as i32 - 4).abs() > 1 {
                        assert!(r.residuals[e][g.index(i, j)].abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn flat_seed_is_rejected() {
        let m = catalog("sphere3", &[1.0]).unwrap();
        assert!(matches!(
            build_net(&m, ParamPoint::new(0.1, 0.2), 5, 5, 0.1, 0.1),
            Err(Error::FlatPoint(_))
        ));
    }

    #[test]
    fn meridian_net_bisects_parametric_lines() {
        let m = meridian_surface(&MeridianSpec::sine(0.8)).unwrap();
        let p = ParamPoint::new(1.2, 0.5);
        let j = m.evaluate_jet(p, 2).unwrap();
        let (e, _, g) = j.first_fundamental();
        let pf = frame::point_frame(&j).unwrap();
        for (a, b) in [pf.dx, pf.dy] {
            assert!(((a / b).abs() - (g / e).sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn net_is_orthogonal_and_residuals_shrink() {
        let m = catalog("generic_graph", &[]).unwrap();
        let seed = ParamPoint::new(0.1, -0.2);
        let mut last = f64::MAX;
        for n in [5usize, 9] {
            let step = 0.16 / (n - 1) as f64;
            let g = build_net(&m, seed, n, n, step, step).unwrap();
            let frames = g.frames.as_ref().unwrap();
            for f in frames {
                let [x, y, _, _] = f.vectors();
                assert!(x.dot(&y).abs() < 1e-12);
            }
            let r = check_integrability(&g).max_residual();
            assert!(r < last);
            last = r;
        }
    }
}
