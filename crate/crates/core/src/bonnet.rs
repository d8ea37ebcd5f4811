//! Reconstruction of a surface from its invariant fields: integrate the frame
//! system `Z_u = A Z`, `Z_v = B Z` and the position system `z_u = √E x`,
//! `z_v = √G y` over a grid.

use nalgebra::{Matrix4, Matrix5, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{self, InvariantFieldGrid};
use crate::surface::{det4, Vec4};
use crate::tolerances;

/// Coefficient matrices of the frame system at one node; rows and columns
/// are ordered `x, y, b, l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameMatrixPair {
    pub a: Matrix4<f64>,
    pub b: Matrix4<f64>,
}

impl FrameMatrixPair {
    /// From `√E, √G` and `γ₁, γ₂, ν₁, ν₂, λ, μ, β₁, β₂`.
    pub fn new(sqrt_e: f64, sqrt_g: f64, inv: [f64; 8]) -> Self {
        let [g1, g2, n1, n2, la, mu, b1, b2] = inv;
        #[rustfmt::skip]
        let a = Matrix4::new(
            0.0, g1, n1, 0.0,
            -g1, 0.0, la, mu,
            -n1, -la, 0.0, b1,
            0.0, -mu, -b1, 0.0,
        ) * sqrt_e;
        #[rustfmt::skip]
        let b = Matrix4::new(
            0.0, -g2, la, mu,
            g2, 0.0, n2, 0.0,
            -la, -n2, 0.0, b2,
            -mu, 0.0, -b2, 0.0,
        ) * sqrt_g;
        FrameMatrixPair { a, b }
    }

    pub fn at(grid: &InvariantFieldGrid, i: usize, j: usize) -> Self {
        FrameMatrixPair::new(
            grid.get(net::SQRT_E, i, j),
            grid.get(net::SQRT_G, i, j),
            grid.node_invariants(i, j),
        )
    }
}

/// Order in which the grid is swept from the initial node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathPolicy {
    /// The `v = 0` spine in `u`, then every column in `v`.
    #[default]
    UThenV,
    /// The `u = 0` spine in `v`, then every row in `u`.
    VThenU,
}

/// One-step method for the frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameStepper {
    /// Exponential of the averaged skew coefficient; orthogonal by construction.
    #[default]
    Exponential,
    /// Classical RK4 followed by re-orthonormalization, for cross-checks.
    Rk4Orthonormalized,
}

/// Quadrature for the positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositionRule {
    /// Exponential of the augmented 5×5 system carrying frame and position;
    /// exact for constant coefficients.
    #[default]
    Augmented,
    /// Trapezoid rule on `√E x` along the integrated frames.
    Trapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    /// Largest admissible compatibility residual; `None` skips the check.
    pub threshold: Option<f64>,
    pub policy: PathPolicy,
    pub stepper: FrameStepper,
    pub positions: PositionRule,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            threshold: Some(tolerances::COMPATIBILITY),
            policy: PathPolicy::UThenV,
            stepper: FrameStepper::Exponential,
            positions: PositionRule::Augmented,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructedPatch {
    pub nu: usize,
    pub nv: usize,
    pub positions: Vec<Vec4>,
    /// `[x, y, b, l]` at every node.
    pub frames: Vec<[Vec4; 4]>,
    /// Largest `|A_v - B_u + AB - BA|` entry over interior nodes.
    pub compatibility_residual: f64,
    /// Largest deviation of a frame Gram matrix from the identity.
    pub gram_drift: f64,
    /// Far-corner distance between the two integration orders.
    pub path_defect: f64,
    /// Largest residual of the grid's compatibility equations.
    pub integrability_residual: f64,
}

impl ReconstructedPatch {
    pub fn position(&self, i: usize, j: usize) -> Vec4 {
        self.positions[i * self.nv + j]
    }
}

/// Check that `frame` (rows `x, y, b, l`) is orthonormal and positive.
pub fn check_initial_frame(frame: &[Vec4; 4]) -> Result<()> {
    let z = frame_matrix(frame);
    let defect = (z * z.transpose() - Matrix4::identity()).amax();
    if !(defect < 1e-10) {
        return Err(Error::BadInitialFrame(defect));
    }
    if det4(&frame[0], &frame[1], &frame[2], &frame[3]) <= 0.0 {
        return Err(Error::BadInitialFrame(2.0));
    }
    Ok(())
}

fn frame_matrix(frame: &[Vec4; 4]) -> Matrix4<f64> {
    Matrix4::from_rows(&frame.map(|w| w.transpose()))
}

fn frame_rows(z: &Matrix4<f64>) -> [Vec4; 4] {
    std::array::from_fn(|r| z.row(r).transpose())
}

/// `[[C, 0], [s eₖᵀ, 0]]`: the frame generator `C` with the position row
/// `z' = s · (row k of Z)`.
fn augmented(c: &Matrix4<f64>, speed: f64, row: usize) -> Matrix5<f64> {
    let mut m = Matrix5::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(c);
    m[(4, row)] = speed;
    m
}

fn rk4_step(c0: &Matrix4<f64>, c1: &Matrix4<f64>, h: f64, z: &Matrix4<f64>) -> Matrix4<f64> {
    let cm = (c0 + c1) * 0.5;
    let k1 = c0 * z;
    let k2 = cm * (z + k1 * (0.5 * h));
    let k3 = cm * (z + k2 * (0.5 * h));
    let k4 = c1 * (z + k3 * h);
    let next = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    orthonormalize_rows(&next)
}

/// Nearest orthogonal matrix (polar factor) via SVD.
fn orthonormalize_rows(z: &Matrix4<f64>) -> Matrix4<f64> {
    let svd = z.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => u * vt,
        _ => *z,
    }
}

/// One step of the frame and position from node data `(c0, s0)` to
/// `(c1, s1)`, where `s` is the speed `√E` (row 0) or `√G` (row 1).
#[allow(clippy::too_many_arguments)]
fn step(
    options: &ReconstructOptions,
    c0: &Matrix4<f64>,
    c1: &Matrix4<f64>,
    s0: f64,
    s1: f64,
    row: usize,
    h: f64,
    z: &Matrix4<f64>,
    p: &Vec4,
) -> (Matrix4<f64>, Vec4) {
    let znext = match options.stepper {
        FrameStepper::Exponential => ((c0 + c1) * (0.5 * h)).exp() * z,
        FrameStepper::Rk4Orthonormalized => rk4_step(c0, c1, h, z),
    };
    let pnext = match options.positions {
        PositionRule::Augmented => {
            let g = augmented(&((c0 + c1) * 0.5), 0.5 * (s0 + s1), row);
            let mut y = Matrix5x4::zeros();
            y.fixed_view_mut::<4, 4>(0, 0).copy_from(z);
            y.fixed_view_mut::<1, 4>(4, 0).copy_from(&p.transpose());
            let ynext = (g * h).exp() * y;
            ynext.fixed_view::<1, 4>(4, 0).transpose()
        }
        PositionRule::Trapezoid => {
            let a: Vector4<f64> = z.row(row).transpose() * s0;
            let b: Vector4<f64> = znext.row(row).transpose() * s1;
            p + (a + b) * (0.5 * h)
        }
    };
    (znext, pnext)
}

type Matrix5x4 = nalgebra::SMatrix<f64, 5, 4>;

fn sweep(
    grid: &InvariantFieldGrid,
    pairs: &[FrameMatrixPair],
    z0: Matrix4<f64>,
    p0: Vec4,
    options: &ReconstructOptions,
) -> (Vec<Matrix4<f64>>, Vec<Vec4>) {
    let (nu, nv) = (grid.nu, grid.nv);
    let idx = |i: usize, j: usize| i * nv + j;
    let se = &grid.fields[net::SQRT_E];
    let sg = &grid.fields[net::SQRT_G];
    let mut frames = vec![Matrix4::zeros(); nu * nv];
    let mut points = vec![Vec4::zeros(); nu * nv];
    frames[0] = z0;
    points[0] = p0;
    let along_u = |k0: usize, k1: usize, z: &Matrix4<f64>, p: &Vec4| {
        step(options, &pairs[k0].a, &pairs[k1].a, se[k0], se[k1], 0, grid.du, z, p)
    };
    let along_v = |k0: usize, k1: usize, z: &Matrix4<f64>, p: &Vec4| {
        step(options, &pairs[k0].b, &pairs[k1].b, sg[k0], sg[k1], 1, grid.dv, z, p)
    };
    match options.policy {
        PathPolicy::UThenV => {
            for i in 1..nu {
                let (k0, k1) = (idx(i - 1, 0), idx(i, 0));
                (frames[k1], points[k1]) = along_u(k0, k1, &frames[k0], &points[k0]);
            }
            let columns: Vec<Vec<(Matrix4<f64>, Vec4)>> = (0..nu)
                .into_par_iter()
                .map(|i| {
                    let mut col = vec![(frames[idx(i, 0)], points[idx(i, 0)])];
                    for j in 1..nv {
                        let (z, p) = col[j - 1];
                        col.push(along_v(idx(i, j - 1), idx(i, j), &z, &p));
                    }
                    col
                })
                .collect();
            for (i, col) in columns.into_iter().enumerate() {
                for (j, (z, p)) in col.into_iter().enumerate() {
                    frames[idx(i, j)] = z;
                    points[idx(i, j)] = p;
                }
            }
        }
        PathPolicy::VThenU => {
            for j in 1..nv {
                let (k0, k1) = (idx(0, j - 1), idx(0, j));
                (frames[k1], points[k1]) = along_v(k0, k1, &frames[k0], &points[k0]);
            }
            let rows: Vec<Vec<(Matrix4<f64>, Vec4)>> = (0..nv)
                .into_par_iter()
                .map(|j| {
                    let mut row = vec![(frames[idx(0, j)], points[idx(0, j)])];
                    for i in 1..nu {
                        let (z, p) = row[i - 1];
                        row.push(along_u(idx(i - 1, j), idx(i, j), &z, &p));
                    }
                    row
                })
                .collect();
            for (j, row) in rows.into_iter().enumerate() {
                for (i, (z, p)) in row.into_iter().enumerate() {
                    frames[idx(i, j)] = z;
                    points[idx(i, j)] = p;
                }
            }
        }
    }
    (frames, points)
}

/// Largest entry of `A_v - B_u + AB - BA` over interior nodes, with central
/// differences.
pub fn compatibility_residual(grid: &InvariantFieldGrid) -> f64 {
    let (nu, nv) = (grid.nu, grid.nv);
    if nu < 3 || nv < 3 {
        return 0.0;
    }
    let pair = |i, j| FrameMatrixPair::at(grid, i, j);
    let mut worst: f64 = 0.0;
    for i in 1..nu - 1 {
        for j in 1..nv - 1 {
            let c = pair(i, j);
            let a_v = (pair(i, j + 1).a - pair(i, j - 1).a) / (2.0 * grid.dv);
            let b_u = (pair(i + 1, j).b - pair(i - 1, j).b) / (2.0 * grid.du);
            let r = a_v - b_u + c.a * c.b - c.b * c.a;
            worst = worst.max(r.amax());
        }
    }
    worst
}

/// Integrate the frame and position systems over the grid from the given
/// frame (rows `x, y, b, l`) and point at node `(0, 0)`.
pub fn reconstruct(
    grid: &InvariantFieldGrid,
    initial_frame: &[Vec4; 4],
    initial_point: Vec4,
) -> Result<ReconstructedPatch> {
    reconstruct_with(grid, initial_frame, initial_point, &ReconstructOptions::default())
}

pub fn reconstruct_with(
    grid: &InvariantFieldGrid,
    initial_frame: &[Vec4; 4],
    initial_point: Vec4,
    options: &ReconstructOptions,
) -> Result<ReconstructedPatch> {
    grid.validate()?;
    check_initial_frame(initial_frame)?;
    let integrability_residual = net::check_integrability(grid).max_residual();
    if let Some(threshold) = options.threshold {
        if !(integrability_residual < threshold) {
            return Err(Error::Incompatible {
                residual: integrability_residual,
                threshold,
            });
        }
    }
    let pairs: Vec<FrameMatrixPair> = (0..grid.nu)
        .flat_map(|i| (0..grid.nv).map(move |j| (i, j)))
        .map(|(i, j)| FrameMatrixPair::at(grid, i, j))
        .collect();
    let z0 = frame_matrix(initial_frame);
    let (frames, positions) = sweep(grid, &pairs, z0, initial_point, options);
    let other = ReconstructOptions {
        policy: match options.policy {
            PathPolicy::UThenV => PathPolicy::VThenU,
            PathPolicy::VThenU => PathPolicy::UThenV,
        },
        ..*options
    };
    let (_, alt) = sweep(grid, &pairs, z0, initial_point, &other);
    let last = grid.len() - 1;
    let path_defect = (positions[last] - alt[last]).norm();
    let gram_drift = frames
        .iter()
        .map(|z| (z * z.transpose() - Matrix4::identity()).amax())
        .fold(0.0, f64::max);
    Ok(ReconstructedPatch {
        nu: grid.nu,
        nv: grid.nv,
        positions,
        frames: frames.iter().map(frame_rows).collect(),
        compatibility_residual: compatibility_residual(grid),
        gram_drift,
        path_defect,
        integrability_residual,
    })
}

/// Fill `√E` and `√G` from the general-class quotients
/// `√E = μ_u / (2μγ₂ + ν₁β₂ - λβ₁)` and `√G = μ_v / (2μγ₁ - λβ₂ + ν₂β₁)`.
pub fn derive_metric_from_invariants(grid: &InvariantFieldGrid) -> Result<InvariantFieldGrid> {
    let mut out = grid.clone();
    let (qe, qg) = net::metric_quotients(grid);
    let mu = &grid.fields[net::MU];
    let mu_u = grid.derivative(mu, 0);
    let mu_v = grid.derivative(mu, 1);
    let scale = mu.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tiny = tolerances::EQUAL * (1.0 + scale);
    for k in 0..grid.len() {
        let (i, j) = (k / grid.nv, k % grid.nv);
        let fail = |reason: String| Err(Error::NotGeneralClass { i, j, reason });
        if mu_u[k].abs() <= tiny || mu_v[k].abs() <= tiny {
            return fail(format!("mu_u = {:e}, mu_v = {:e}", mu_u[k], mu_v[k]));
        }
        match (qe[k], qg[k]) {
            (Some(e), Some(g)) if e > 0.0 && g > 0.0 => {
                out.fields[net::SQRT_E][k] = e;
                out.fields[net::SQRT_G][k] = g;
            }
            (Some(e), Some(g)) => return fail(format!("non-positive metric quotients {e:e}, {g:e}")),
            _ => return fail("vanishing denominator".into()),
        }
    }
    Ok(out)
}
