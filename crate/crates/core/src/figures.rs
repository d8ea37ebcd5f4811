//! Tangent indicatrix, ellipse of normal curvature and the class predicates
//! built on them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frame::GeometricFrame;
use crate::invariants::{self, InvariantRecord, PointClass};
use crate::surface::{SurfaceJet, Vec4};
use crate::tolerances::{self, nearly_equal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndicatrixKind {
    Circle,
    Ellipse,
    RectangularHyperbola,
    Hyperbola,
    ParallelLines,
    Undefined,
}

/// The conic `ν' X² + ν'' Y² = ±1` in principal coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixClass {
    pub kind: IndicatrixKind,
    /// `1/√|ν'|` and `1/√|ν''|`; `None` where the curvature vanishes.
    pub semi_axes: (Option<f64>, Option<f64>),
}

/// `ν' = ν''` within the shared equality slack.
pub fn is_minimal_pair(nu_prime: f64, nu_doubleprime: f64) -> bool {
    nearly_equal(nu_prime, nu_doubleprime)
}

/// `κ = (ν' + ν'')/2 = 0` within the shared equality slack.
pub fn is_flat_normal_pair(nu_prime: f64, nu_doubleprime: f64) -> bool {
    nearly_equal(nu_prime, -nu_doubleprime)
}

pub fn indicatrix_from_curvatures(nu_prime: f64, nu_doubleprime: f64, flat: bool) -> IndicatrixClass {
    let zero = |x: f64| x.abs() < tolerances::EQUAL * (nu_prime.abs() + nu_doubleprime.abs());
    let axis = |x: f64| {
        if zero(x) || flat {
            None
        } else {
            Some(1.0 / x.abs().sqrt())
        }
    };
    let semi_axes = (axis(nu_prime), axis(nu_doubleprime));
    let kind = if flat || (zero(nu_prime) && zero(nu_doubleprime)) {
        IndicatrixKind::Undefined
    } else if is_minimal_pair(nu_prime, nu_doubleprime) {
        IndicatrixKind::Circle
    } else if zero(nu_prime) || zero(nu_doubleprime) {
        IndicatrixKind::ParallelLines
    } else if is_flat_normal_pair(nu_prime, nu_doubleprime) {
        IndicatrixKind::RectangularHyperbola
    } else if nu_prime * nu_doubleprime > 0.0 {
        IndicatrixKind::Ellipse
    } else {
        IndicatrixKind::Hyperbola
    };
    IndicatrixClass { kind, semi_axes }
}

pub fn indicatrix(record: &InvariantRecord) -> IndicatrixClass {
    indicatrix_from_curvatures(
        record.nu_prime,
        record.nu_doubleprime,
        record.point_class == PointClass::Flat,
    )
}

/// Image of the unit tangent circle under `v ↦ σ(v, v)`:
/// `H + cos 2ψ · a + sin 2ψ · b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureEllipse {
    pub center: Vec4,
    /// `a = (σ(x,x) - σ(y,y))/2`
    pub half_diameter_1: Vec4,
    /// `b = σ(x,y)`
    pub half_diameter_2: Vec4,
    pub area: f64,
    pub degenerate_segment: bool,
    /// Half-length of the segment, `√(‖H‖² - K)`; set only when degenerate.
    pub segment_length: Option<f64>,
    /// The segment lies on the line through `p` spanned by `H`.
    pub collinear_with_h: bool,
    /// Degenerate with `K = 0`, i.e. `d = ‖H‖`.
    pub k_zero_subclass: bool,
    /// `|a ∧ b|`, so that `area = π |a ∧ b|`.
    pub wedge: f64,
}

impl CurvatureEllipse {
    pub fn point(&self, psi: f64) -> Vec4 {
        let (s, c) = (2.0 * psi).sin_cos();
        self.center + self.half_diameter_1 * c + self.half_diameter_2 * s
    }

    /// `‖a‖² + ‖b‖²`, which equals `‖H‖² - K`.
    pub fn spread(&self) -> f64 {
        self.half_diameter_1.norm_squared() + self.half_diameter_2.norm_squared()
    }

    pub fn is_centered(&self) -> bool {
        self.center.norm_squared() <= tolerances::UMBILIC * (1.0 + self.spread())
    }

    /// `a ⊥ b` and `‖a‖ = ‖b‖`.
    pub fn is_circle(&self) -> bool {
        let (a, b) = (&self.half_diameter_1, &self.half_diameter_2);
        let s = self.spread();
        (a.norm_squared() - b.norm_squared()).abs() <= tolerances::EQUAL * s
            && 2.0 * a.dot(b).abs() <= tolerances::EQUAL * s
    }
}

fn wedge_norm(a: &Vec4, b: &Vec4) -> f64 {
    // Gram determinant, clamped against roundoff
    (a.norm_squared() * b.norm_squared() - a.dot(b).powi(2)).max(0.0).sqrt()
}

pub fn curvature_ellipse(jet: &SurfaceJet) -> Result<CurvatureEllipse> {
    jet.check_immersion()?;
    let (sxx, sxy, syy) = invariants::sigma_orthonormal(jet);
    let center = (sxx + syy) * 0.5;
    let a = (sxx - syy) * 0.5;
    let b = sxy;
    let wedge = wedge_norm(&a, &b);
    let spread = a.norm_squared() + b.norm_squared();
    // a curvature "ellipse" of round-off size is a point
    let point = spread.sqrt() <= tolerances::FLAT * (1.0 + center.norm());
    let degenerate = point || wedge <= tolerances::SEGMENT_RANK * spread;
    let direction = if a.norm_squared() >= b.norm_squared() { a } else { b };
    let collinear_with_h = degenerate
        && !point
        && wedge_norm(&center, &direction) <= tolerances::SEGMENT_RANK * center.norm() * direction.norm();
    let gauss = sxx.dot(&syy) - sxy.norm_squared();
    let h2 = center.norm_squared();
    Ok(CurvatureEllipse {
        center,
        half_diameter_1: a,
        half_diameter_2: b,
        area: std::f64::consts::PI * wedge,
        degenerate_segment: degenerate,
        segment_length: degenerate.then(|| if point { 0.0 } else { spread.sqrt() }),
        collinear_with_h,
        k_zero_subclass: degenerate && gauss.abs() <= tolerances::EQUAL * (h2 + 1.0),
        wedge,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassPredicates {
    pub flat_point: bool,
    pub minimal: bool,
    pub flat_normal_connection: bool,
    pub super_conformal: bool,
    pub wintgen_ideal: bool,
    /// `None` when no geometric frame was supplied.
    pub chen_nontrivial: Option<bool>,
    /// `‖H‖² - K - |κ|`, never negative in exact arithmetic.
    pub wintgen_slack: f64,
}

/// Class predicates at one point. The ellipse supplies the super-conformal
/// and Wintgen tests; `frame` is needed only for the Chen test.
pub fn class_predicates(
    record: &InvariantRecord,
    ellipse: &CurvatureEllipse,
    frame: Option<&GeometricFrame>,
) -> ClassPredicates {
    let flat_point = record.point_class == PointClass::Flat;
    let minimal = !flat_point && is_minimal_pair(record.nu_prime, record.nu_doubleprime);
    let flat_normal_connection = is_flat_normal_pair(record.nu_prime, record.nu_doubleprime);
    let spread = ellipse.spread();
    let wintgen_slack = spread - 2.0 * ellipse.wedge;
    let chen_nontrivial = frame.map(|fr| {
        let scale = fr.nu1.abs() + fr.nu2.abs() + fr.mu.abs();
        !minimal && fr.lambda.abs() <= tolerances::EQUAL * (scale + 1.0)
    });
    ClassPredicates {
        flat_point,
        minimal,
        flat_normal_connection,
        super_conformal: ellipse.is_circle(),
        wintgen_ideal: wintgen_slack <= tolerances::EQUAL * spread,
        chen_nontrivial,
        wintgen_slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use crate::surface::ParamPoint;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn jet(name: &str, params: &[f64], u: f64, v: f64) -> SurfaceJet {
        catalog(name, params)
            .unwrap()
            .evaluate_jet(ParamPoint::new(u, v), 2)
            .unwrap()
    }

    #[test]
    fn indicatrix_examples() {
        assert_eq!(indicatrix_from_curvatures(1.0, 1.0, false).kind, IndicatrixKind::Circle);
        let rh = indicatrix_from_curvatures(1.0, -1.0, false);
        assert_eq!(rh.kind, IndicatrixKind::RectangularHyperbola);
        assert_eq!(rh.semi_axes, (Some(1.0), Some(1.0)));
        let pl = indicatrix_from_curvatures(1.0, 0.0, false);
        assert_eq!(pl.kind, IndicatrixKind::ParallelLines);
        assert_eq!(pl.semi_axes, (Some(1.0), None));
        assert_eq!(
            indicatrix_from_curvatures(4.0, 1.0, false).kind,
            IndicatrixKind::Ellipse
        );
        assert_eq!(
            indicatrix_from_curvatures(4.0, -1.0, false).kind,
            IndicatrixKind::Hyperbola
        );
        assert_eq!(
            indicatrix_from_curvatures(0.0, 0.0, true).kind,
            IndicatrixKind::Undefined
        );
    }

    #[test]
    fn holomorphic_ellipse_is_centered_circle() {
        let e = curvature_ellipse(&jet("holomorphic_graph", &[], 0.0, 0.0)).unwrap();
        assert!(e.center.norm() < 1e-14);
        assert!(e.is_centered() && e.is_circle());
        assert!((e.area - PI / 2.0 * 8.0).abs() < 1e-11);
    }

    #[test]
    fn clifford_ellipse_is_segment() {
        let e = curvature_ellipse(&jet("clifford_torus", &[1.0], 0.4, 1.3)).unwrap();
        assert!(e.degenerate_segment && e.area.abs() < 1e-14);
        assert!((e.center.norm() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((e.segment_length.unwrap() - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(!e.collinear_with_h);
        assert!(e.k_zero_subclass);
    }

    #[test]
    fn psi_sweep_matches_direct_second_fundamental_form() {
        let j = jet("generic_graph", &[], 0.3, -0.4);
        let e = curvature_ellipse(&j).unwrap();
        let (x, y) = invariants::tangent_basis(&j);
        for i in 0..16 {
            let psi = PI * i as f64 / 16.0;
            let t = x * psi.cos() + y * psi.sin();
            // σ(t, t) from the parameter-space expansion of t
            let first = invariants::FirstFundamental::of(&j);
            let mu = t.dot(&y) * first.e.sqrt() / first.w;
            let lam = (t.dot(&x) - mu * first.f / first.e.sqrt()) / first.e.sqrt();
            let second = j.z_uu * (lam * lam) + j.z_uv * (2.0 * lam * mu) + j.z_vv * (mu * mu);
            let direct = invariants::normal_part(&j, &second);
            assert!((direct - e.point(psi)).amax() < 1e-12);
        }
    }

    #[test]
    fn flat_point_ellipse_collapses() {
        let e = curvature_ellipse(&jet("sphere3", &[1.0], 0.2, 0.1)).unwrap();
        assert_eq!(e.segment_length, Some(0.0), "{e:?}");
        assert!(e.degenerate_segment);
    }

    #[test]
    fn predicates_on_golden_surfaces() {
        let j = jet("holomorphic_graph", &[], 0.0, 0.0);
        let r = invariants::invariant_record(&j).unwrap();
        let p = class_predicates(&r, &curvature_ellipse(&j).unwrap(), None);
        assert!(p.minimal && p.super_conformal && p.wintgen_ideal);
        assert!(p.wintgen_slack.abs() < 1e-12);
        assert_eq!(p.chen_nontrivial, None);

        let j = jet("clifford_torus", &[1.0], 0.0, 0.0);
        let r = invariants::invariant_record(&j).unwrap();
        let p = class_predicates(&r, &curvature_ellipse(&j).unwrap(), None);
        assert!(!p.minimal && p.flat_normal_connection);
        assert_eq!(indicatrix(&r).kind, IndicatrixKind::RectangularHyperbola);

        let j = jet("sphere3", &[1.0], 0.0, 0.0);
        let r = invariants::invariant_record(&j).unwrap();
        let p = class_predicates(&r, &curvature_ellipse(&j).unwrap(), None);
        assert!(p.flat_point && !p.minimal);
        assert_eq!(indicatrix(&r).kind, IndicatrixKind::Undefined);
    }

    #[test]
    fn wintgen_slack_matches_record() {
        let j = jet("generic_graph", &[], -0.5, 0.45);
        let r = invariants::invariant_record(&j).unwrap();
        let e = curvature_ellipse(&j).unwrap();
        let p = class_predicates(&r, &e, None);
        let direct = r.h_norm.powi(2) - r.gauss_k - r.kappa.abs();
        assert!((p.wintgen_slack - direct).abs() < 1e-12);
        assert!((e.area - PI / 2.0 * r.kappa.abs()).abs() < 1e-12);
    }
}
