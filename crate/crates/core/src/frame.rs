//! The geometric frame `{x, y, b, l}` and its eight invariant functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{self, PointClass};
use crate::surface::{det4, ParamPoint, SurfaceJet, SurfaceModel, Vec4};
use crate::tolerances;

/// Frame vectors and the pointwise invariants `ν₁, ν₂, λ, μ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointFrame {
    pub x: Vec4,
    pub y: Vec4,
    pub b: Vec4,
    pub l: Vec4,
    /// Parameter-space components of `x` and `y`.
    pub dx: (f64, f64),
    pub dy: (f64, f64),
    pub nu1: f64,
    pub nu2: f64,
    pub lambda: f64,
    pub mu: f64,
    /// `σ(x,x)` vanished and `b` was taken along `σ(y,y)`.
    pub b_fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricFrame {
    pub point: ParamPoint,
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub b: [f64; 4],
    pub l: [f64; 4],
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub lambda: f64,
    pub mu: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub b_fallback: bool,
}

fn to_array(w: &Vec4) -> [f64; 4] {
    [w[0], w[1], w[2], w[3]]
}

impl GeometricFrame {
    pub fn vectors(&self) -> [Vec4; 4] {
        [self.x, self.y, self.b, self.l].map(Vec4::from)
    }

    /// The eight invariants in the order `γ₁, γ₂, ν₁, ν₂, λ, μ, β₁, β₂`.
    pub fn invariants(&self) -> [f64; 8] {
        [
            self.gamma1,
            self.gamma2,
            self.nu1,
            self.nu2,
            self.lambda,
            self.mu,
            self.beta1,
            self.beta2,
        ]
    }

    /// `k = -4 ν₁ ν₂ μ²`
    pub fn k(&self) -> f64 {
        -4.0 * self.nu1 * self.nu2 * self.mu * self.mu
    }

    /// `κ = (ν₁ - ν₂) μ`
    pub fn kappa(&self) -> f64 {
        (self.nu1 - self.nu2) * self.mu
    }

    /// `K = ν₁ ν₂ - (λ² + μ²)`
    pub fn gauss_k(&self) -> f64 {
        self.nu1 * self.nu2 - (self.lambda * self.lambda + self.mu * self.mu)
    }

    /// `‖H‖ = √(κ² - k) / (2|μ|)`
    pub fn h_norm(&self) -> f64 {
        let kappa = self.kappa();
        (kappa * kappa - self.k()).max(0.0).sqrt() / (2.0 * self.mu.abs())
    }

    /// The same frame with `(b, l)` replaced by `(-b, -l)`. `ν₁, ν₂, λ, μ`
    /// change sign; `β₁ = ⟨∇_x b, l⟩` and `β₂` are invariant under the flip.
    pub fn flipped_normal_pair(&self) -> Self {
        let neg = |w: [f64; 4]| w.map(|c| -c);
        GeometricFrame {
            b: neg(self.b),
            l: neg(self.l),
            nu1: -self.nu1,
            nu2: -self.nu2,
            lambda: -self.lambda,
            mu: -self.mu,
            ..*self
        }
    }
}

/// `a(H) = (√(κ² - k) / 2) λ l`
pub fn allied_mean_curvature(frame: &GeometricFrame) -> Vec4 {
    let kappa = frame.kappa();
    let root = (kappa * kappa - frame.k()).max(0.0).sqrt();
    Vec4::from(frame.l) * (0.5 * root * frame.lambda)
}

/// `σ(X, X)` for the tangent with parameter components `d`.
fn sigma(jet: &SurfaceJet, d: (f64, f64)) -> Vec4 {
    let w = jet.z_uu * (d.0 * d.0) + jet.z_uv * (2.0 * d.0 * d.1) + jet.z_vv * (d.1 * d.1);
    invariants::normal_part(jet, &w)
}

fn sigma_mixed(jet: &SurfaceJet, a: (f64, f64), c: (f64, f64)) -> Vec4 {
    let w = jet.z_uu * (a.0 * c.0) + jet.z_uv * (a.0 * c.1 + a.1 * c.0) + jet.z_vv * (a.1 * c.1);
    invariants::normal_part(jet, &w)
}

/// Parameter components of a tangent vector.
pub(crate) fn components(jet: &SurfaceJet, t: &Vec4) -> (f64, f64) {
    let (e, f, g) = jet.first_fundamental();
    let (p, q) = (t.dot(&jet.z_u), t.dot(&jet.z_v));
    let det = e * g - f * f;
    ((g * p - f * q) / det, (e * q - f * p) / det)
}

/// Frame vectors and `ν₁, ν₂, λ, μ` from a single jet.
pub fn point_frame(jet: &SurfaceJet) -> Result<PointFrame> {
    let record = invariants::invariant_record(jet)?;
    if record.point_class == PointClass::Flat {
        return Err(Error::FlatPoint(jet.point));
    }
    let gap = record.umbilic_gap();
    let kappa = record.kappa;
    if gap < tolerances::UMBILIC * (kappa * kappa + record.k.abs() + 1.0) {
        return Err(Error::MinimalPoint { point: jet.point, gap });
    }
    let (x, y) = invariants::principal_vectors(jet)?;
    let (dx, dy) = (components(jet, &x), components(jet, &y));
    let sxx = sigma(jet, dx);
    let syy = sigma(jet, dy);
    let sxy = sigma_mixed(jet, dx, dy);
    let scale = sxx.norm().max(syy.norm()).max(sxy.norm());
    let tiny = tolerances::FLAT * (1.0 + scale);
    let (mut b, b_fallback) = if sxx.norm() > tiny {
        (sxx.normalize(), false)
    } else if syy.norm() > tiny {
        (syy.normalize(), true)
    } else {
        return Err(Error::DegenerateNormal(jet.point));
    };
    let h = sxx + syy;
    let hb = h.dot(&b);
    if hb.abs() > tolerances::EQUAL * (sxx.norm() + syy.norm()) {
        if hb < 0.0 {
            b = -b;
        }
    } else if (sxx - syy).dot(&b) < 0.0 {
        b = -b;
    }
    let nf = invariants::normal_frame(jet);
    let (b1, b2) = (b.dot(&nf.e1), b.dot(&nf.e2));
    let mut l = nf.e2 * b1 - nf.e1 * b2;
    if det4(&x, &y, &b, &l) < 0.0 {
        l = -l;
    }
    Ok(PointFrame {
        x,
        y,
        b,
        l,
        dx,
        dy,
        nu1: sxx.dot(&b),
        nu2: syy.dot(&b),
        lambda: sxy.dot(&b),
        mu: sxy.dot(&l),
        b_fallback,
    })
}

/// Align a neighbouring frame with a reference: matches the labelling of the
/// two principal directions and the signs of `x` and `b`.
fn align(mut f: PointFrame, reference: &PointFrame) -> PointFrame {
    if f.x.dot(&reference.x).abs() < f.y.dot(&reference.x).abs() {
        // principal directions swapped order; keep y = Jx
        let (x, y) = (f.y, -f.x);
        let (dx, dy) = (f.dy, (-f.dx.0, -f.dx.1));
        f.x = x;
        f.y = y;
        f.dx = dx;
        f.dy = dy;
        std::mem::swap(&mut f.nu1, &mut f.nu2);
        // σ(y, -x) = -σ(x, y)
        f.lambda = -f.lambda;
        f.mu = -f.mu;
    }
    if f.x.dot(&reference.x) < 0.0 {
        f.x = -f.x;
        f.y = -f.y;
        f.dx = (-f.dx.0, -f.dx.1);
        f.dy = (-f.dy.0, -f.dy.1);
    }
    if f.b.dot(&reference.b) < 0.0 {
        f.b = -f.b;
        f.l = -f.l;
        f.nu1 = -f.nu1;
        f.nu2 = -f.nu2;
        f.lambda = -f.lambda;
        f.mu = -f.mu;
    }
    f
}

/// Frame at `p` aligned with `reference`.
pub fn aligned_point_frame(model: &SurfaceModel, p: ParamPoint, reference: &PointFrame) -> Result<PointFrame> {
    let jet = model.evaluate_jet(p, 2)?;
    Ok(align(point_frame(&jet)?, reference))
}

/// Ambient derivatives of the four frame vectors along the parameter
/// direction `d`, by second-order differences with step `h`. Central where
/// the stencil fits in the domain, one-sided otherwise.
fn frame_derivative(
    model: &SurfaceModel,
    p: ParamPoint,
    d: (f64, f64),
    h: f64,
    center: &PointFrame,
) -> Result<[Vec4; 4]> {
    let dom = model.domain();
    let at = |s: f64| p.offset(s * h * d.0, s * h * d.1);
    let vecs = |f: &PointFrame| [f.x, f.y, f.b, f.l];
    let fits = |s: &[f64]| s.iter().all(|&t| dom.contains(at(t)));
    let eval = |s: f64| aligned_point_frame(model, at(s), center);
    if fits(&[1.0, -1.0]) {
        let (fp, fm) = (vecs(&eval(1.0)?), vecs(&eval(-1.0)?));
        Ok(std::array::from_fn(|i| (fp[i] - fm[i]) / (2.0 * h)))
    } else {
        let sign = if fits(&[1.0, 2.0]) {
            1.0
        } else if fits(&[-1.0, -2.0]) {
            -1.0
        } else {
            return Err(Error::OutOfDomain {
                label: model.label().to_string(),
                point: at(1.0),
            });
        };
        let f0 = vecs(center);
        let (f1, f2) = (vecs(&eval(sign)?), vecs(&eval(2.0 * sign)?));
        Ok(std::array::from_fn(|i| {
            (f1[i] * 4.0 - f0[i] * 3.0 - f2[i]) / (2.0 * h * sign)
        }))
    }
}

pub fn default_frame_step(model: &SurfaceModel) -> f64 {
    tolerances::FRAME_STEP * model.domain().scale()
}

/// Geometric frame with all eight invariants at `p`.
pub fn geometric_frame(model: &SurfaceModel, p: ParamPoint) -> Result<GeometricFrame> {
    geometric_frame_with_step(model, p, default_frame_step(model))
}

pub fn geometric_frame_with_step(model: &SurfaceModel, p: ParamPoint, h: f64) -> Result<GeometricFrame> {
    let jet = model.evaluate_jet(p, 2)?;
    let pf = point_frame(&jet)?;
    assemble(model, p, h, pf)
}

/// Geometric frame whose `x` and `b` are oriented like those of `reference`
/// (used to keep signs coherent across a grid).
pub fn geometric_frame_aligned(
    model: &SurfaceModel,
    p: ParamPoint,
    h: f64,
    reference: &PointFrame,
) -> Result<GeometricFrame> {
    let pf = aligned_point_frame(model, p, reference)?;
    assemble(model, p, h, pf)
}

fn assemble(model: &SurfaceModel, p: ParamPoint, h: f64, pf: PointFrame) -> Result<GeometricFrame> {
    let along_x = frame_derivative(model, p, pf.dx, h, &pf)?;
    let along_y = frame_derivative(model, p, pf.dy, h, &pf)?;
    Ok(GeometricFrame {
        point: p,
        x: to_array(&pf.x),
        y: to_array(&pf.y),
        b: to_array(&pf.b),
        l: to_array(&pf.l),
        gamma1: along_x[0].dot(&pf.y),
        gamma2: along_y[1].dot(&pf.x),
        nu1: pf.nu1,
        nu2: pf.nu2,
        lambda: pf.lambda,
        mu: pf.mu,
        beta1: along_x[2].dot(&pf.l),
        beta2: along_y[2].dot(&pf.l),
        b_fallback: pf.b_fallback,
    })
}

/// Largest residual of the eight Frenet-type equations when the frame
/// derivatives are taken with step `h`.
pub fn frenet_residual(model: &SurfaceModel, p: ParamPoint, h: f64) -> Result<f64> {
    let jet = model.evaluate_jet(p, 2)?;
    let pf = point_frame(&jet)?;
    let g = geometric_frame_with_step(model, p, h)?;
    let dx = frame_derivative(model, p, pf.dx, h, &pf)?;
    let dy = frame_derivative(model, p, pf.dy, h, &pf)?;
    let (x, y, b, l) = (pf.x, pf.y, pf.b, pf.l);
    let (g1, g2, n1, n2, la, mu, b1, b2) = (g.gamma1, g.gamma2, g.nu1, g.nu2, g.lambda, g.mu, g.beta1, g.beta2);
    let residuals = [
        dx[0] - (y * g1 + b * n1),
        dx[1] - (-x * g1 + b * la + l * mu),
        dy[0] - (-y * g2 + b * la + l * mu),
        dy[1] - (x * g2 + b * n2),
        dx[2] - (-x * n1 - y * la + l * b1),
        dy[2] - (-x * la - y * n2 + l * b2),
        dx[3] - (-y * mu - b * b1),
        dy[3] - (-x * mu - b * b2),
    ];
    Ok(residuals.iter().map(|r| r.amax()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn clifford_torus_frame() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        let f = geometric_frame(&m, ParamPoint::new(0.7, 2.0)).unwrap();
        let tol = 1e-9;
        assert!((f.nu1 - FRAC_1_SQRT_2).abs() < tol && (f.nu2 - FRAC_1_SQRT_2).abs() < tol);
        assert!(f.lambda.abs() < tol && (f.mu.abs() - FRAC_1_SQRT_2).abs() < tol);
        for v in [f.gamma1, f.gamma2, f.beta1, f.beta2] {
            assert!(v.abs() < 1e-7, "{f:?}");
        }
        assert!((f.k() + 1.0).abs() < tol && f.kappa().abs() < tol && f.gauss_k().abs() < tol);
        assert!(allied_mean_curvature(&f).norm() < tol);
    }

    #[test]
    fn frame_is_orthonormal_and_positive() {
        let m = catalog("generic_graph", &[]).unwrap();
        let f = geometric_frame(&m, ParamPoint::new(0.3, 0.2)).unwrap();
        let v = f.vectors();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v[i].dot(&v[j]) - expected).abs() < 1e-12);
            }
        }
        assert!(det4(&v[0], &v[1], &v[2], &v[3]) > 0.0);
    }

    #[test]
    fn identities_with_pointwise_record() {
        let m = catalog("generic_graph", &[]).unwrap();
        let p = ParamPoint::new(-0.4, 0.55);
        let f = geometric_frame(&m, p).unwrap();
        let r = invariants::invariant_record(&m.evaluate_jet(p, 2).unwrap()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + b.abs());
        assert!(rel(f.k(), r.k) && rel(f.kappa(), r.kappa));
        assert!(rel(f.gauss_k(), r.gauss_k) && rel(f.h_norm(), r.h_norm));
    }

    #[test]
    fn gamma_matches_metric_derivatives_in_principal_parameters() {
        // F = M = 0: γ₁ = -∂_v(ln √E)/√G and γ₂ = -∂_u(ln √G)/√E, up to the
        // labelling of which coordinate line is x
        let m = catalog("rotation_general", &[0.5, 1.0]).unwrap();
        let p = ParamPoint::new(0.8, 0.4);
        let f = geometric_frame(&m, p).unwrap();
        let (e, g) = {
            let j = m.evaluate_jet(p, 2).unwrap();
            let (e, _, g) = j.first_fundamental();
            (e, g)
        };
        let h = 1e-5;
        let ln_sqrt = |q: ParamPoint, pick_e: bool| {
            let (e, _, g) = m.evaluate_jet(q, 2).unwrap().first_fundamental();
            0.5 * if pick_e { e } else { g }.ln()
        };
        let de_v = (ln_sqrt(p.offset(0.0, h), true) - ln_sqrt(p.offset(0.0, -h), true)) / (2.0 * h);
        let dg_u = (ln_sqrt(p.offset(h, 0.0), false) - ln_sqrt(p.offset(-h, 0.0), false)) / (2.0 * h);
        let (ga, gb) = (-de_v / g.sqrt(), -dg_u / e.sqrt());
        let z_u = m.evaluate_jet(p, 2).unwrap().z_u;
        let x_along_u = Vec4::from(f.x).dot(&z_u).abs() > 0.5 * e.sqrt();
        let (exp1, exp2) = if x_along_u { (ga, gb) } else { (gb, ga) };
        // signs depend on the orientation chosen for x
        assert!((f.gamma1.abs() - exp1.abs()).abs() < 1e-6, "{} vs {}", f.gamma1, exp1);
        assert!((f.gamma2.abs() - exp2.abs()).abs() < 1e-6, "{} vs {}", f.gamma2, exp2);
        assert!(ga.abs() < 1e-9 && gb.abs() > 1e-2, "{ga} {gb}");
    }

    #[test]
    fn flipping_normal_pair_keeps_invariants() {
        let m = catalog("generic_graph", &[]).unwrap();
        let f = geometric_frame(&m, ParamPoint::new(0.1, -0.3)).unwrap();
        let g = f.flipped_normal_pair();
        assert_eq!(g.k(), f.k());
        assert_eq!(g.gauss_k(), f.gauss_k());
        assert_eq!(g.kappa().abs(), f.kappa().abs());
        assert_eq!(g.h_norm(), f.h_norm());
        assert_eq!((g.beta1, g.beta2), (f.beta1, f.beta2));
        // flipping both normals keeps the orientation
        let v = g.vectors();
        assert!(det4(&v[0], &v[1], &v[2], &v[3]) > 0.0);
    }

    #[test]
    fn frenet_residual_converges_quadratically() {
        let m = catalog("generic_graph", &[]).unwrap();
        let p = ParamPoint::new(0.25, 0.35);
        let r1 = frenet_residual(&m, p, 4e-3).unwrap();
        let r2 = frenet_residual(&m, p, 2e-3).unwrap();
        let r3 = frenet_residual(&m, p, 1e-3).unwrap();
        let order = ((r1 / r2).log2() + (r2 / r3).log2()) / 2.0;
        assert!(order > 1.8, "residuals {r1:e} {r2:e} {r3:e}");
    }

    #[test]
    fn allied_vector_example() {
        let f = GeometricFrame {
            point: ParamPoint::new(0.0, 0.0),
            x: [1.0, 0.0, 0.0, 0.0],
            y: [0.0, 1.0, 0.0, 0.0],
            b: [0.0, 0.0, 1.0, 0.0],
            l: [0.0, 0.0, 0.0, 1.0],
            gamma1: 0.0,
            gamma2: 0.0,
            nu1: 2.0,
            nu2: 0.0,
            lambda: 3.0,
            mu: 1.0,
            beta1: 0.0,
            beta2: 0.0,
            b_fallback: false,
        };
        assert_eq!(f.kappa(), 2.0);
        assert_eq!(f.k(), 0.0);
        assert_eq!(allied_mean_curvature(&f), Vec4::new(0.0, 0.0, 0.0, 3.0));
    }

    #[test]
    fn refuses_minimal_and_flat_points() {
        let m = catalog("holomorphic_graph", &[]).unwrap();
        assert!(matches!(
            geometric_frame(&m, ParamPoint::new(0.1, 0.2)),
            Err(Error::MinimalPoint { .. })
        ));
        let s = catalog("sphere3", &[1.0]).unwrap();
        assert!(matches!(
            geometric_frame(&s, ParamPoint::new(0.1, 0.2)),
            Err(Error::FlatPoint(_))
        ));
    }
}
