//! Structured reports written by the command-line front end.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::Alignment;
use crate::bonnet::ReconstructedPatch;
use crate::error::Result;
use crate::figures::{self, ClassPredicates, CurvatureEllipse, IndicatrixClass};
use crate::frame::{self, GeometricFrame};
use crate::invariants::{self, InvariantRecord};
use crate::meridian::{self, Family, MeridianSpec, RateLaw};
use crate::net::{self, IntegrabilityReport, InvariantFieldGrid};
use crate::surface::{ParamPoint, SurfaceModel};
use crate::tolerances;

/// Thresholds behind every predicate and class in a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRegime {
    pub immersion: f64,
    pub flat: f64,
    pub equal: f64,
    pub segment_rank: f64,
    pub umbilic: f64,
    /// Frame-difference step as a fraction of the domain scale.
    pub frame_step: f64,
}

impl Default for ToleranceRegime {
    fn default() -> Self {
        ToleranceRegime {
            immersion: tolerances::IMMERSION,
            flat: tolerances::FLAT,
            equal: tolerances::EQUAL,
            segment_rank: tolerances::SEGMENT_RANK,
            umbilic: tolerances::UMBILIC,
            frame_step: tolerances::FRAME_STEP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseReport {
    pub center: [f64; 4],
    pub half_diameter_1: [f64; 4],
    pub half_diameter_2: [f64; 4],
    pub area: f64,
    pub degenerate_segment: bool,
    pub segment_length: Option<f64>,
    pub collinear_with_h: bool,
    pub k_zero_subclass: bool,
    pub centered: bool,
    pub circle: bool,
}

impl From<&CurvatureEllipse> for EllipseReport {
    fn from(e: &CurvatureEllipse) -> Self {
        let arr = |w: &crate::surface::Vec4| [w[0], w[1], w[2], w[3]];
        EllipseReport {
            center: arr(&e.center),
            half_diameter_1: arr(&e.half_diameter_1),
            half_diameter_2: arr(&e.half_diameter_2),
            area: e.area,
            degenerate_segment: e.degenerate_segment,
            segment_length: e.segment_length,
            collinear_with_h: e.collinear_with_h,
            k_zero_subclass: e.k_zero_subclass,
            centered: e.is_centered(),
            circle: e.is_circle(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub record: InvariantRecord,
    pub indicatrix: IndicatrixClass,
    pub ellipse: EllipseReport,
    pub predicates: ClassPredicates,
    /// Absent where the frame is undefined (minimal or flat points).
    pub frame: Option<GeometricFrame>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub point: ParamPoint,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub points: usize,
    pub failures: usize,
    pub class_counts: BTreeMap<String, usize>,
    pub minimal: usize,
    pub flat_normal_connection: usize,
    pub super_conformal: usize,
    pub wintgen_ideal: usize,
    pub chen_nontrivial: usize,
    pub frames: usize,
    /// `[min, max]` over the analysed points.
    pub k_range: [f64; 2],
    pub kappa_range: [f64; 2],
    pub gauss_k_range: [f64; 2],
    pub h_norm_range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub surface: String,
    pub grid: [usize; 2],
    pub order: u8,
    pub tolerances: ToleranceRegime,
    pub summary: AnalysisSummary,
    pub records: Vec<PointReport>,
    pub failures: Vec<PointFailure>,
}

/// Everything pointwise at one parameter point; `frame_step` overrides the
/// default step of the frame differences.
pub fn analyze_point(model: &SurfaceModel, p: ParamPoint, order: u8, frame_step: Option<f64>) -> Result<PointReport> {
    let jet = model.evaluate_jet(p, order)?;
    let record = invariants::invariant_record(&jet)?;
    let ellipse = figures::curvature_ellipse(&jet)?;
    let h = frame_step.unwrap_or_else(|| frame::default_frame_step(model));
    let frame = frame::geometric_frame_with_step(model, p, h).ok();
    Ok(PointReport {
        indicatrix: figures::indicatrix(&record),
        predicates: figures::class_predicates(&record, &ellipse, frame.as_ref()),
        ellipse: EllipseReport::from(&ellipse),
        record,
        frame,
    })
}

/// Sweep the cell centres of an `nu × nv` grid over the model's domain.
pub fn analyze(model: &SurfaceModel, nu: usize, nv: usize, order: u8, frame_step: Option<f64>) -> AnalysisReport {
    let d = model.domain();
    let points: Vec<ParamPoint> = (0..nu)
        .flat_map(|i| {
            (0..nv).map(move |j| {
                ParamPoint::new(
                    d.u.0 + d.width_u() * (i as f64 + 0.5) / nu as f64,
                    d.v.0 + d.width_v() * (j as f64 + 0.5) / nv as f64,
                )
            })
        })
        .collect();
    let results: Vec<std::result::Result<PointReport, PointFailure>> = points
        .par_iter()
        .map(|&p| {
            analyze_point(model, p, order, frame_step).map_err(|e| PointFailure {
                point: p,
                message: e.to_string(),
            })
        })
        .collect();
    let (mut records, mut failures) = (Vec::new(), Vec::new());
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => failures.push(f),
        }
    }
    let range = |f: &dyn Fn(&PointReport) -> f64| {
        records
            .iter()
            .map(f)
            .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], x| [lo.min(x), hi.max(x)])
    };
    let count = |f: &dyn Fn(&PointReport) -> bool| records.iter().filter(|r| f(r)).count();
    let mut class_counts = BTreeMap::new();
    for r in &records {
        *class_counts.entry(format!("{:?}", r.record.point_class)).or_insert(0) += 1;
    }
    let summary = AnalysisSummary {
        points: records.len(),
        failures: failures.len(),
        class_counts,
        minimal: count(&|r| r.predicates.minimal),
        flat_normal_connection: count(&|r| r.predicates.flat_normal_connection),
        super_conformal: count(&|r| r.predicates.super_conformal),
        wintgen_ideal: count(&|r| r.predicates.wintgen_ideal),
        chen_nontrivial: count(&|r| r.predicates.chen_nontrivial == Some(true)),
        frames: count(&|r| r.frame.is_some()),
        k_range: range(&|r| r.record.k),
        kappa_range: range(&|r| r.record.kappa),
        gauss_k_range: range(&|r| r.record.gauss_k),
        h_norm_range: range(&|r| r.record.h_norm),
    };
    AnalysisReport {
        surface: model.label().to_string(),
        grid: [nu, nv],
        order,
        tolerances: ToleranceRegime::default(),
        summary,
        records,
        failures,
    }
}

/// Names of the six compatibility equations in residual order.
pub const EQUATION_NAMES: [&str; 6] = ["sqrtE_v", "sqrtG_u", "gauss", "codazzi_b_1", "codazzi_b_2", "ricci"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationSummary {
    pub name: String,
    pub max_abs: f64,
    pub rms: f64,
    pub worst_node: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub grid: [usize; 2],
    pub steps: [f64; 2],
    pub holonomy: f64,
    pub threshold: f64,
    pub equations: Vec<EquationSummary>,
    pub max_residual: f64,
    pub mu_equations_max_abs: [f64; 2],
    pub general_class: bool,
    pub general_class_quotients_positive: bool,
    pub passed: bool,
}

pub fn check_report(grid: &InvariantFieldGrid, threshold: f64) -> CheckReport {
    let r: IntegrabilityReport = net::check_integrability(grid);
    let equations = (0..6)
        .map(|e| EquationSummary {
            name: EQUATION_NAMES[e].to_string(),
            max_abs: r.max_abs[e],
            rms: r.rms[e],
            worst_node: [r.worst_node[e].0, r.worst_node[e].1],
        })
        .collect();
    let max_residual = r.max_residual();
    CheckReport {
        grid: [grid.nu, grid.nv],
        steps: [grid.du, grid.dv],
        holonomy: grid.holonomy,
        threshold,
        equations,
        max_residual,
        mu_equations_max_abs: r.mu_equations_max_abs,
        general_class: r.general_class,
        general_class_quotients_positive: r.condition_4_3,
        passed: max_residual < threshold,
    }
}

impl CheckReport {
    /// The equation with the largest residual.
    pub fn worst(&self) -> &EquationSummary {
        self.equations
            .iter()
            .max_by(|a, b| a.max_abs.total_cmp(&b.max_abs))
            .expect("six equations")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub grid: [usize; 2],
    pub compatibility_residual: f64,
    pub integrability_residual: f64,
    pub gram_drift: f64,
    pub path_defect: f64,
    pub general_class: bool,
    /// `false` when the grid is outside the class where the invariants
    /// determine the surface up to a motion.
    pub unique_up_to_motion: bool,
}

pub fn reconstruct_report(grid: &InvariantFieldGrid, patch: &ReconstructedPatch) -> ReconstructReport {
    let r = net::check_integrability(grid);
    ReconstructReport {
        grid: [patch.nu, patch.nv],
        compatibility_residual: patch.compatibility_residual,
        integrability_residual: patch.integrability_residual,
        gram_drift: patch.gram_drift,
        path_defect: patch.path_defect,
        general_class: r.general_class,
        unique_up_to_motion: r.general_class && r.condition_4_3,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignReport {
    pub points: usize,
    pub rms: f64,
    pub max_distance: f64,
    pub rotation: [[f64; 4]; 4],
    pub translation: [f64; 4],
}

pub fn align_report(
    alignment: &Alignment,
    candidate: &[crate::surface::Vec4],
    reference: &[crate::surface::Vec4],
) -> AlignReport {
    let max_distance = candidate
        .iter()
        .zip(reference)
        .map(|(c, r)| (c - alignment.apply(r)).norm())
        .fold(0.0, f64::max);
    let t = alignment.translation;
    AlignReport {
        points: candidate.len(),
        rms: alignment.rms,
        max_distance,
        rotation: std::array::from_fn(|i| std::array::from_fn(|j| alignment.rotation[(i, j)])),
        translation: [t[0], t[1], t[2], t[3]],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianSample {
    pub u: f64,
    pub v: f64,
    pub k: f64,
    pub kappa: f64,
    pub gauss_k: f64,
    pub h_norm: f64,
}

/// The quantity a family holds constant, and how well it does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstancyCheck {
    pub quantity: String,
    pub target: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeridianReport {
    pub family: String,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub class: String,
    pub grid: [usize; 2],
    pub tolerances: ToleranceRegime,
    pub kappa_max_abs: f64,
    pub constancy: Vec<ConstancyCheck>,
    /// Largest residual of the profile equation along the closed form.
    pub profile_equation_residual: Option<f64>,
    pub samples: Vec<MeridianSample>,
}

impl MeridianReport {
    pub fn satisfied(&self) -> bool {
        self.constancy.iter().all(|c| c.satisfied)
    }
}

pub const CONSTANT_GAUSS_TOLERANCE: f64 = 1e-6;
pub const CONSTANT_MEAN_TOLERANCE: f64 = 1e-5;
pub const PROFILE_EQUATION_TOLERANCE: f64 = 1e-8;
pub const ZERO_KAPPA_TOLERANCE: f64 = 1e-9;

/// Measure a meridian surface on the cell centres of an `nu × nv` grid and
/// check the constancy its family promises.
pub fn meridian_report(spec: &MeridianSpec, nu: usize, nv: usize) -> Result<MeridianReport> {
    let model = meridian::meridian_surface(spec)?;
    let (u0, u1) = spec.u_range;
    let (v0, v1) = spec.v_range;
    let points: Vec<ParamPoint> = (0..nu)
        .flat_map(|i| {
            (0..nv).map(move |j| {
                ParamPoint::new(
                    u0 + (u1 - u0) * (i as f64 + 0.5) / nu as f64,
                    v0 + (v1 - v0) * (j as f64 + 0.5) / nv as f64,
                )
            })
        })
        .collect();
    let samples: Vec<MeridianSample> = points
        .par_iter()
        .map(|&p| {
            let rec = invariants::invariant_record(&model.evaluate_jet(p, 2)?)?;
            Ok(MeridianSample {
                u: p.u,
                v: p.v,
                k: rec.k,
                kappa: rec.kappa,
                gauss_k: rec.gauss_k,
                h_norm: rec.h_norm,
            })
        })
        .collect::<Result<_>>()?;
    let deviation = |f: &dyn Fn(&MeridianSample) -> f64, target: f64| {
        samples.iter().map(|s| (f(s) - target).abs()).fold(0.0, f64::max)
    };
    let check = |quantity: &str, target: f64, max_deviation: f64, tolerance: f64| ConstancyCheck {
        quantity: quantity.to_string(),
        target,
        max_deviation,
        tolerance,
        satisfied: max_deviation < tolerance,
    };
    let kappa_max_abs = deviation(&|s| s.kappa, 0.0);
    let mut constancy = vec![check("kappa", 0.0, kappa_max_abs, ZERO_KAPPA_TOLERANCE)];
    let law = match spec.family {
        Family::ConstantGauss { k, .. } => {
            constancy.push(check(
                "gauss_k",
                k,
                deviation(&|s| s.gauss_k, k),
                CONSTANT_GAUSS_TOLERANCE,
            ));
            None
        }
        Family::Cmc { a, b, c } => {
            let target = a.abs();
            constancy.push(check(
                "h_norm",
                target,
                deviation(&|s| s.h_norm, target),
                CONSTANT_MEAN_TOLERANCE,
            ));
            Some(RateLaw::Cmc { a, b, c })
        }
        Family::ConstantK { a, b, c, branch } => {
            let target = -a * a;
            constancy.push(check("k", target, deviation(&|s| s.k, target), CONSTANT_MEAN_TOLERANCE));
            Some(RateLaw::ConstantK { a, b, c, branch })
        }
        Family::Sine | Family::Custom => None,
    };
    let profile_equation_residual = law.map(|law| {
        (0..=200)
            .map(|i| {
                let u = u0 + (u1 - u0) * (0.01 + 0.98 * i as f64 / 200.0);
                law.ode_residual(spec.profile.f_derivatives(u)[0]).abs()
            })
            .fold(0.0, f64::max)
    });
    if let Some(r) = profile_equation_residual {
        constancy.push(check("profile_equation", 0.0, r, PROFILE_EQUATION_TOLERANCE));
    }
    Ok(MeridianReport {
        family: meridian::family_label(&spec.family).to_string(),
        u_range: [u0, u1],
        v_range: [v0, v1],
        class: format!("{:?}", meridian::classify(spec, 64)),
        grid: [nu, nv],
        tolerances: ToleranceRegime::default(),
        kappa_max_abs,
        constancy,
        profile_equation_residual,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn torus_sweep_tallies() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        let r = analyze(&m, 8, 8, 3, None);
        assert_eq!(r.records.len(), 64);
        assert_eq!(r.summary.flat_normal_connection, 64);
        assert_eq!(r.summary.class_counts.get("Hyperbolic"), Some(&64));
        assert!((r.summary.k_range[0] + 1.0).abs() < 1e-9 && (r.summary.k_range[1] + 1.0).abs() < 1e-9);
        assert!((r.summary.h_norm_range[0] - FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn holomorphic_graph_is_minimal_everywhere() {
        let m = catalog("holomorphic_graph", &[]).unwrap();
        let r = analyze(&m, 5, 5, 2, None);
        assert_eq!(r.summary.minimal, 25);
        assert_eq!(r.summary.frames, 0);
    }

    #[test]
    fn report_json_is_deterministic() {
        let m = catalog("generic_graph", &[]).unwrap();
        let a = serde_json::to_string(&analyze(&m, 4, 3, 3, None)).unwrap();
        let b = serde_json::to_string(&analyze(&m, 4, 3, 3, None)).unwrap();
        assert_eq!(a, b);
        let back: AnalysisReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back.records.len(), 12);
    }

    #[test]
    fn corrupted_grid_fails_check_at_the_corruption() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        let mut g = net::build_net(&m, ParamPoint::new(0.0, 0.0), 11, 11, 0.1, 0.1).unwrap();
        assert!(check_report(&g, 1e-3).passed);
        let k = g.index(4, 6);
        g.fields[net::NU1][k] += 0.5;
        let r = check_report(&g, 1e-3);
        assert!(!r.passed);
        let [i, j] = r.worst().worst_node;
        assert!(i.abs_diff(4) <= 1 && j.abs_diff(6) <= 1, "{i} {j}");
    }

    #[test]
    fn cmc_meridian_report() {
        let spec = meridian::cmc_profile(1.0, 0.5, 0.0).unwrap();
        let r = meridian_report(&spec, 12, 6).unwrap();
        assert!(r.satisfied(), "{:?}", r.constancy);
        assert_eq!(r.family, "cmc");
    }
}
