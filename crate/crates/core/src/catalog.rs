//! Named analytic surfaces.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::meridian::{self, MeridianSpec, SphereCurvature};
use crate::surface::{Domain, SurfaceModel};

/// Catalog entries with their parameter counts and a short description.
pub const ENTRIES: &[(&str, usize, &str)] = &[
    ("clifford_torus", 1, "(a cos u, a sin u, a cos v, a sin v)"),
    ("holomorphic_graph", 0, "(u, v, u^2 - v^2, 2uv)"),
    ("holomorphic_exp", 0, "(u, v, e^u cos v, e^u sin v)"),
    ("sphere3", 1, "round sphere of radius r in the hyperplane x4 = 0"),
    ("graph", 10, "(u, v, phi, psi) with cubic phi, psi (10 coefficients)"),
    ("generic_graph", 0, "fixed (u, v, phi, psi) example without symmetry"),
    (
        "rotation_general",
        2,
        "(f cos v, f sin v, g cos v, g sin v), f = u, g = p u^2 + q",
    ),
    (
        "meridian_sine",
        1,
        "meridian surface f = sin u, g = -cos u, spherical curvature b",
    ),
    (
        "meridian_constant_K",
        4,
        "meridian surface with constant Gauss curvature: K, alpha, beta, b",
    ),
    ("meridian_cmc", 3, "constant mean curvature meridian surface: a, b, C"),
    (
        "meridian_constant_k",
        3,
        "meridian surface with constant k = -a^2: a, b, C",
    ),
];

pub fn catalog(name: &str, params: &[f64]) -> Result<SurfaceModel> {
    let expected = ENTRIES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, count, _)| *count)
        .ok_or_else(|| Error::UnknownSurface(name.to_string()))?;
    if params.len() != expected {
        return Err(Error::ParameterCount {
            name: name.to_string(),
            expected,
            got: params.len(),
        });
    }
    let model = match name {
        "clifford_torus" => clifford_torus(params[0])?,
        "holomorphic_graph" => holomorphic_graph(),
        "holomorphic_exp" => holomorphic_exp(),
        "sphere3" => sphere3(params[0])?,
        "graph" => {
            let mut c = [0.0; 10];
            c.copy_from_slice(params);
            graph(name, c)
        }
        "generic_graph" => graph(name, [0.5, 0.3, -0.2, 0.1, 0.0, 0.4, -0.6, 0.25, 0.2, -0.1]),
        "rotation_general" => rotation_general(params[0], params[1]),
        "meridian_sine" => meridian::meridian_surface(&MeridianSpec::sine(params[0]))?,
        "meridian_constant_K" => {
            let spec = meridian::constant_k_gauss_profile(params[0], params[1], params[2])?
                .with_curvature(SphereCurvature::Constant(params[3]));
            meridian::meridian_surface(&spec)?
        }
        "meridian_cmc" => meridian::meridian_surface(&meridian::cmc_profile(params[0], params[1], params[2])?)?,
        "meridian_constant_k" => {
            meridian::meridian_surface(&meridian::constant_k_profile(params[0], params[1], params[2])?)?
        }
        _ => unreachable!("entry table and match arms disagree"),
    };
    Ok(model)
}

pub fn clifford_torus(a: f64) -> Result<SurfaceModel> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "torus radius must be positive, got {a}"
        )));
    }
    let domain = Domain::new((0.0, 2.0 * PI), (0.0, 2.0 * PI)).periodic(true, true);
    Ok(SurfaceModel::analytic("clifford_torus", domain, move |u, v| {
        [u.cos() * a, u.sin() * a, v.cos() * a, v.sin() * a]
    }))
}

pub fn holomorphic_graph() -> SurfaceModel {
    SurfaceModel::analytic("holomorphic_graph", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |u, v| {
        [u, v, u * u - v * v, u * v * 2.0]
    })
}

pub fn holomorphic_exp() -> SurfaceModel {
    SurfaceModel::analytic("holomorphic_exp", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |u, v| {
        let e = u.exp();
        [u, v, e * v.cos(), e * v.sin()]
    })
}

pub fn sphere3(r: f64) -> Result<SurfaceModel> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sphere radius must be positive, got {r}"
        )));
    }
    // latitude u stays away from the poles
    let domain = Domain::new((-1.4, 1.4), (0.0, 2.0 * PI)).periodic(false, true);
    Ok(SurfaceModel::analytic("sphere3", domain, move |u, v| {
        let cu = u.cos();
        [cu * v.cos() * r, cu * v.sin() * r, u.sin() * r, u * 0.0]
    }))
}

/// `(u, v, φ, ψ)` with
/// `φ = c0 u² + c1 uv + c2 v² + c3 u³ + c4 v³` and
/// `ψ = c5 u² + c6 uv + c7 v² + c8 u²v + c9 uv²`.
pub fn graph(label: &str, c: [f64; 10]) -> SurfaceModel {
    SurfaceModel::analytic(label, Domain::new((-1.0, 1.0), (-1.0, 1.0)), move |u, v| {
        let (uu, uv, vv) = (u * u, u * v, v * v);
        let phi = uu * c[0] + uv * c[1] + vv * c[2] + uu * u * c[3] + vv * v * c[4];
        let psi = uu * c[5] + uv * c[6] + vv * c[7] + uu * v * c[8] + u * vv * c[9];
        [u, v, phi, psi]
    })
}

/// Rotation of the plane curve `(u, p u² + q)` under the simultaneous
/// rotation of the `x1x2` and `x3x4` planes. Its coordinate lines are
/// lines of curvature (`F = M = 0`).
pub fn rotation_general(p: f64, q: f64) -> SurfaceModel {
    let domain = Domain::new((0.3, 1.5), (0.0, 2.0 * PI)).periodic(false, true);
    SurfaceModel::analytic("rotation_general", domain, move |u: Jet, v: Jet| {
        let f = u;
        let g = u * u * p + q;
        let (c, s) = (v.cos(), v.sin());
        [f * c, f * s, g * c, g * s]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::ParamPoint;

    #[test]
    fn unknown_name_and_bad_arity() {
        assert!(matches!(catalog("klein_bottle", &[]), Err(Error::UnknownSurface(_))));
        assert!(matches!(
            catalog("clifford_torus", &[]),
            Err(Error::ParameterCount {
                expected: 1,
                got: 0,
                ..
            })
        ));
    }

    #[test]
    fn torus_domain_is_full_period() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        assert_eq!(m.domain().u, (0.0, 2.0 * PI));
        assert_eq!(m.domain().v, (0.0, 2.0 * PI));
    }

    #[test]
    fn every_entry_builds_and_is_immersed_at_its_center() {
        let defaults: &[(&str, Vec<f64>)] = &[
            ("clifford_torus", vec![1.0]),
            ("holomorphic_graph", vec![]),
            ("holomorphic_exp", vec![]),
            ("sphere3", vec![2.0]),
            ("graph", vec![1.0, 0.0, -1.0, 0.1, 0.0, 0.0, 2.0, 0.0, 0.0, 0.3]),
            ("generic_graph", vec![]),
            ("rotation_general", vec![0.5, 1.0]),
            ("meridian_sine", vec![1.0]),
            ("meridian_constant_K", vec![1.0, 0.0, 1.0, 1.0]),
            ("meridian_cmc", vec![1.0, 0.5, 0.0]),
            ("meridian_constant_k", vec![1.0, 1.0, 0.5]),
        ];
        assert_eq!(defaults.len(), ENTRIES.len());
        for (name, params) in defaults {
            let m = catalog(name, params).unwrap();
            let d = m.domain();
            let c = ParamPoint::new(0.5 * (d.u.0 + d.u.1), 0.5 * (d.v.0 + d.v.1));
            m.evaluate_jet(c, 3).unwrap();
        }
    }
}
