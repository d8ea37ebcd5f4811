//! Parametric surfaces `z(u, v)` in R⁴ and their derivative jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::tolerances;

pub type Vec4 = nalgebra::Vector4<f64>;

/// Oriented volume `det(a, b, c, d)` of four column vectors.
pub fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    Matrix4::from_columns(&[*a, *b, *c, *d]).determinant()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub u: f64,
    pub v: f64,
}

impl ParamPoint {
    pub fn new(u: f64, v: f64) -> Self {
        ParamPoint { u, v }
    }

    pub fn offset(&self, du: f64, dv: f64) -> Self {
        ParamPoint {
            u: self.u + du,
            v: self.v + dv,
        }
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Parameter rectangle. Periodic axes never report a point as outside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Domain {
            u,
            v,
            periodic_u: false,
            periodic_v: false,
        }
    }

    pub fn periodic(mut self, periodic_u: bool, periodic_v: bool) -> Self {
        self.periodic_u = periodic_u;
        self.periodic_v = periodic_v;
        self
    }

    pub fn width_u(&self) -> f64 {
        self.u.1 - self.u.0
    }

    pub fn width_v(&self) -> f64 {
        self.v.1 - self.v.0
    }

    /// Length scale used for default step sizes.
    pub fn scale(&self) -> f64 {
        self.width_u().max(self.width_v())
    }

    pub fn contains(&self, p: ParamPoint) -> bool {
        let slack = 1e-12 * (1.0 + self.scale());
        let in_u = self.periodic_u || (p.u >= self.u.0 - slack && p.u <= self.u.1 + slack);
        let in_v = self.periodic_v || (p.v >= self.v.0 - slack && p.v <= self.v.1 + slack);
        in_u && in_v && p.u.is_finite() && p.v.is_finite()
    }
}

/// Position and partial derivatives up to third order at one parameter point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet {
    pub point: ParamPoint,
    pub z: Vec4,
    pub z_u: Vec4,
    pub z_v: Vec4,
    pub z_uu: Vec4,
    pub z_uv: Vec4,
    pub z_vv: Vec4,
    pub z_uuu: Vec4,
    pub z_uuv: Vec4,
    pub z_uvv: Vec4,
    pub z_vvv: Vec4,
    /// 2 or 3: which derivatives are populated.
    pub order: u8,
}

impl SurfaceJet {
    pub fn first_fundamental(&self) -> (f64, f64, f64) {
        (
            self.z_u.dot(&self.z_u),
            self.z_u.dot(&self.z_v),
            self.z_v.dot(&self.z_v),
        )
    }

    /// Largest norm among the first and second derivatives.
    pub fn scale(&self) -> f64 {
        [self.z_u, self.z_v, self.z_uu, self.z_uv, self.z_vv]
            .iter()
            .map(|w| w.norm())
            .fold(0.0, f64::max)
    }

    /// Fails unless `EG - F² > IMMERSION · max(E,G)²`.
    pub fn check_immersion(&self) -> Result<()> {
        let (e, f, g) = self.first_fundamental();
        let gram = e * g - f * f;
        if gram > tolerances::IMMERSION * e.max(g).powi(2) && gram.is_finite() {
            Ok(())
        } else {
            Err(Error::Degenerate {
                point: self.point,
                gram,
            })
        }
    }

    fn from_coordinates(point: ParamPoint, coords: &[Jet; 4], order: u8) -> Self {
        let pick = |i: u8, j: u8| Vec4::from_fn(|k, _| coords[k].partial(i, j));
        let third = order >= 3;
        let zero = Vec4::zeros();
        SurfaceJet {
            point,
            z: pick(0, 0),
            z_u: pick(1, 0),
            z_v: pick(0, 1),
            z_uu: pick(2, 0),
            z_uv: pick(1, 1),
            z_vv: pick(0, 2),
            z_uuu: if third { pick(3, 0) } else { zero },
            z_uuv: if third { pick(2, 1) } else { zero },
            z_uvv: if third { pick(1, 2) } else { zero },
            z_vvv: if third { pick(0, 3) } else { zero },
            order,
        }
    }
}

/// Coordinate formulas evaluated in jet arithmetic.
pub type JetFn = dyn Fn(Jet, Jet) -> [Jet; 4] + Send + Sync;
/// Plain position evaluator, differentiated by central differences.
pub type PointFn = dyn Fn(f64, f64) -> Vec4 + Send + Sync;

#[derive(Clone)]
enum Evaluator {
    Analytic(Arc<JetFn>),
    Numeric { position: Arc<PointFn>, step: f64 },
}

/// A labelled surface with its parameter domain.
#[derive(Clone)]
pub struct SurfaceModel {
    label: String,
    domain: Domain,
    evaluator: Evaluator,
}

impl fmt::Debug for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceModel")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl SurfaceModel {
    pub fn analytic<F>(label: impl Into<String>, domain: Domain, formula: F) -> Self
    where
        F: Fn(Jet, Jet) -> [Jet; 4] + Send + Sync + 'static,
    {
        SurfaceModel {
            label: label.into(),
            domain,
            evaluator: Evaluator::Analytic(Arc::new(formula)),
        }
    }

    /// A surface known only through point evaluations. Jets come from
    /// central differences with step `eps^(1/4) · domain scale`.
    pub fn numeric<F>(label: impl Into<String>, domain: Domain, position: F) -> Self
    where
        F: Fn(f64, f64) -> Vec4 + Send + Sync + 'static,
    {
        let step = tolerances::default_fd_step(domain.scale());
        SurfaceModel {
            label: label.into(),
            domain,
            evaluator: Evaluator::Numeric {
                position: Arc::new(position),
                step,
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.evaluator, Evaluator::Analytic(_))
    }

    fn check_domain(&self, p: ParamPoint) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                label: self.label.clone(),
                point: p,
            })
        }
    }

    /// Position without domain checks.
    pub fn position_unchecked(&self, p: ParamPoint) -> Vec4 {
        match &self.evaluator {
            Evaluator::Analytic(f) => {
                let c = f(Jet::constant(p.u, 0), Jet::constant(p.v, 0));
                Vec4::new(c[0].value(), c[1].value(), c[2].value(), c[3].value())
            }
            Evaluator::Numeric { position, .. } => position(p.u, p.v),
        }
    }

    pub fn position(&self, p: ParamPoint) -> Result<Vec4> {
        self.check_domain(p)?;
        Ok(self.position_unchecked(p))
    }

    /// Derivative jet of order 2 or 3 at `p`, with the immersion check.
    pub fn evaluate_jet(&self, p: ParamPoint, order: u8) -> Result<SurfaceJet> {
        if !(2..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("jet order must be 2 or 3, got {order}")));
        }
        self.check_domain(p)?;
        let jet = match &self.evaluator {
            Evaluator::Analytic(f) => {
                let coords = f(Jet::var_u(p.u, order), Jet::var_v(p.v, order));
                SurfaceJet::from_coordinates(p, &coords, order)
            }
            Evaluator::Numeric { step, .. } => self.fd_jet_unchecked(p, *step, order),
        };
        jet.check_immersion()?;
        Ok(jet)
    }

    /// Central-difference estimate of the jet, accurate to O(h²).
    ///
    /// The stencil reaches `p ± h` (order 2) or `p ± 2h` (order 3) along
    /// each axis and must stay inside the domain.
    pub fn finite_difference_jet(&self, p: ParamPoint, h: f64, order: u8) -> Result<SurfaceJet> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "finite-difference step must be positive, got {h}"
            )));
        }
        if !(2..=3).contains(&order) {
            return Err(Error::InvalidArgument(format!("jet order must be 2 or 3, got {order}")));
        }
        let reach = if order == 3 { 2.0 * h } else { h };
        for (du, dv) in [(reach, 0.0), (-reach, 0.0), (0.0, reach), (0.0, -reach)] {
            self.check_domain(p.offset(du, dv))?;
        }
        let jet = self.fd_jet_unchecked(p, h, order);
        jet.check_immersion()?;
        Ok(jet)
    }

    fn fd_jet_unchecked(&self, p: ParamPoint, h: f64, order: u8) -> SurfaceJet {
        let f = |i: i32, j: i32| self.position_unchecked(p.offset(i as f64 * h, j as f64 * h));
        let f00 = f(0, 0);
        let (fp0, fm0, f0p, f0m) = (f(1, 0), f(-1, 0), f(0, 1), f(0, -1));
        let (fpp, fpm, fmp, fmm) = (f(1, 1), f(1, -1), f(-1, 1), f(-1, -1));
        let h2 = h * h;
        let mut jet = SurfaceJet {
            point: p,
            z: f00,
            z_u: (fp0 - fm0) / (2.0 * h),
            z_v: (f0p - f0m) / (2.0 * h),
            z_uu: (fp0 - 2.0 * f00 + fm0) / h2,
            z_uv: (fpp - fpm - fmp + fmm) / (4.0 * h2),
            z_vv: (f0p - 2.0 * f00 + f0m) / h2,
            z_uuu: Vec4::zeros(),
            z_uuv: Vec4::zeros(),
            z_uvv: Vec4::zeros(),
            z_vvv: Vec4::zeros(),
            order,
        };
        if order >= 3 {
            let h3 = h2 * h;
            jet.z_uuu = (f(2, 0) - 2.0 * fp0 + 2.0 * fm0 - f(-2, 0)) / (2.0 * h3);
            jet.z_vvv = (f(0, 2) - 2.0 * f0p + 2.0 * f0m - f(0, -2)) / (2.0 * h3);
            // second difference in one axis, central first difference in the other
            jet.z_uuv = ((fpp - 2.0 * f0p + fmp) - (fpm - 2.0 * f0m + fmm)) / (2.0 * h3);
            jet.z_uvv = ((fpp - 2.0 * fp0 + fpm) - (fmp - 2.0 * fm0 + fmm)) / (2.0 * h3);
        }
        jet
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn assert_vec(a: &Vec4, b: [f64; 4], tol: f64) {
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn clifford_torus_jet_at_origin() {
        let m = catalog::catalog("clifford_torus", &[1.0]).unwrap();
        let j = m.evaluate_jet(ParamPoint::new(0.0, 0.0), 2).unwrap();
        assert_vec(&j.z, [1.0, 0.0, 1.0, 0.0], 1e-15);
        assert_vec(&j.z_u, [0.0, 1.0, 0.0, 0.0], 1e-15);
        assert_vec(&j.z_v, [0.0, 0.0, 0.0, 1.0], 1e-15);
        assert_vec(&j.z_uu, [-1.0, 0.0, 0.0, 0.0], 1e-15);
        assert_vec(&j.z_uv, [0.0; 4], 1e-15);
        assert_vec(&j.z_vv, [0.0, 0.0, -1.0, 0.0], 1e-15);
    }

    #[test]
    fn holomorphic_graph_jet_at_origin() {
        let m = catalog::catalog("holomorphic_graph", &[]).unwrap();
        let j = m.evaluate_jet(ParamPoint::new(0.0, 0.0), 3).unwrap();
        assert_vec(&j.z_u, [1.0, 0.0, 0.0, 0.0], 0.0);
        assert_vec(&j.z_v, [0.0, 1.0, 0.0, 0.0], 0.0);
        assert_vec(&j.z_uu, [0.0, 0.0, 2.0, 0.0], 0.0);
        assert_vec(&j.z_uv, [0.0, 0.0, 0.0, 2.0], 0.0);
        assert_vec(&j.z_vv, [0.0, 0.0, -2.0, 0.0], 0.0);
        assert_vec(&j.z_uuu, [0.0; 4], 0.0);
    }

    #[test]
    fn sphere_in_hyperplane_has_zero_fourth_component() {
        let m = catalog::catalog("sphere3", &[1.0]).unwrap();
        let j = m.evaluate_jet(ParamPoint::new(0.0, 0.0), 3).unwrap();
        for w in [
            j.z, j.z_u, j.z_v, j.z_uu, j.z_uv, j.z_vv, j.z_uuu, j.z_uuv, j.z_uvv, j.z_vvv,
        ] {
            assert_eq!(w[3], 0.0);
        }
    }

    #[test]
    fn finite_differences_match_analytic_jet_on_torus() {
        let m = catalog::catalog("clifford_torus", &[1.0]).unwrap();
        let p = ParamPoint::new(0.3, 0.7);
        let exact = m.evaluate_jet(p, 3).unwrap();
        let fd = m.finite_difference_jet(p, 1e-3, 3).unwrap();
        let pairs = [
            (exact.z_u, fd.z_u),
            (exact.z_v, fd.z_v),
            (exact.z_uu, fd.z_uu),
            (exact.z_uv, fd.z_uv),
            (exact.z_vv, fd.z_vv),
            (exact.z_uuu, fd.z_uuu),
            (exact.z_uuv, fd.z_uuv),
            (exact.z_uvv, fd.z_uvv),
            (exact.z_vvv, fd.z_vvv),
        ];
        for (a, b) in pairs {
            assert!((a - b).amax() < 1e-5, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn finite_differences_exact_on_quadratic_graph() {
        let m = catalog::catalog("holomorphic_graph", &[]).unwrap();
        let p = ParamPoint::new(0.21, -0.37);
        let exact = m.evaluate_jet(p, 2).unwrap();
        let fd = m.finite_difference_jet(p, 1e-2, 2).unwrap();
        for (a, b) in [(exact.z_uu, fd.z_uu), (exact.z_uv, fd.z_uv), (exact.z_vv, fd.z_vv)] {
            assert!((a - b).amax() < 1e-11);
        }
    }

    #[test]
    fn zero_step_is_rejected() {
        let m = catalog::catalog("clifford_torus", &[1.0]).unwrap();
        assert!(matches!(
            m.finite_difference_jet(ParamPoint::new(0.3, 0.3), 0.0, 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let m = catalog::catalog("holomorphic_graph", &[]).unwrap();
        assert!(matches!(
            m.evaluate_jet(ParamPoint::new(50.0, 0.0), 2),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(m.evaluate_jet(ParamPoint::new(0.0, 0.0), 4).is_err());
    }

    #[test]
    fn degenerate_parameterization_is_reported() {
        // z_v vanishes identically
        let m = SurfaceModel::analytic("cylinder_line", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |u, v| {
            let zero = v * 0.0;
            [u, u * u, zero, zero]
        });
        assert!(matches!(
            m.evaluate_jet(ParamPoint::new(0.1, 0.2), 2),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn numeric_model_uses_difference_path() {
        let m = SurfaceModel::numeric("torus_samples", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |u, v| {
            Vec4::new(u.cos(), u.sin(), v.cos(), v.sin())
        });
        assert!(!m.is_analytic());
        let j = m.evaluate_jet(ParamPoint::new(0.2, 0.4), 2).unwrap();
        assert!((j.z_uu - Vec4::new(-(0.2f64).cos(), -(0.2f64).sin(), 0.0, 0.0)).amax() < 1e-6);
    }
}
