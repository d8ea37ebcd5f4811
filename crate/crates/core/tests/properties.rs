use nalgebra::Matrix4;
use proptest::prelude::*;

use surf4::align::rigid_align;
use surf4::catalog::graph;
use surf4::figures::curvature_ellipse;
use surf4::invariants::{invariant_record, InvariantRecord};
use surf4::io::{parse_csv4d, parse_grid, write_csv4d, write_grid, SampledPatch};
use surf4::jet::Jet;
use surf4::net::InvariantFieldGrid;
use surf4::surface::{Domain, ParamPoint, SurfaceModel, Vec4};

fn coefficients() -> impl Strategy<Value = [f64; 10]> {
    prop::array::uniform10(-1.0..1.0f64)
}

/// Orthogonal matrix from a random square matrix; `proper` fixes the sign
/// of the determinant.
fn orthogonal(entries: &[f64], proper: bool) -> Matrix4<f64> {
    let m = Matrix4::from_iterator(entries.iter().copied());
    let mut q = m.qr().q();
    if (q.determinant() > 0.0) != proper {
        q.set_column(0, &(-q.column(0)));
    }
    q
}

fn moved_graph(c: [f64; 10], rot: Matrix4<f64>, shift: [f64; 4]) -> SurfaceModel {
    let domain = Domain::new((-1.0, 1.0), (-1.0, 1.0));
    SurfaceModel::analytic("moved", domain, move |u, v| {
        let (uu, uv, vv) = (u * u, u * v, v * v);
        let phi = uu * c[0] + uv * c[1] + vv * c[2] + uu * u * c[3] + vv * v * c[4];
        let psi = uu * c[5] + uv * c[6] + vv * c[7] + uu * v * c[8] + u * vv * c[9];
        let z = [u, v, phi, psi];
        let row = |i: usize| {
            let mut acc = Jet::constant(shift[i], u.order());
            for (k, zk) in z.iter().enumerate() {
                acc += *zk * rot[(i, k)];
            }
            acc
        };
        [row(0), row(1), row(2), row(3)]
    })
}

fn record_at(model: &SurfaceModel, p: ParamPoint) -> InvariantRecord {
    invariant_record(&model.evaluate_jet(p, 2).unwrap()).unwrap()
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_survive_ambient_motions(
        c in coefficients(),
        entries in prop::collection::vec(-1.0..1.0f64, 16),
        shift in prop::array::uniform4(-2.0..2.0f64),
        proper in any::<bool>(),
        u in -0.5..0.5f64,
        v in -0.5..0.5f64,
    ) {
        let rot = orthogonal(&entries, proper);
        let p = ParamPoint::new(u, v);
        let a = record_at(&graph("g", c), p);
        let b = record_at(&moved_graph(c, rot, shift), p);
        let s = a.nu_prime.abs() + a.nu_doubleprime.abs();
        prop_assert!(close(a.k, b.k, s * s));
        prop_assert!(close(a.gauss_k, b.gauss_k, s * s));
        prop_assert!(close(a.h_norm, b.h_norm, s));
        prop_assert!(close(a.kappa.abs(), b.kappa.abs(), s));
        // reflections reverse the orientation of the normal plane
        let sign = if proper { 1.0 } else { -1.0 };
        prop_assert!(close(a.kappa, sign * b.kappa, s));
        prop_assert_eq!(a.point_class, b.point_class);
    }

    #[test]
    fn curvature_identities_on_random_graphs(c in coefficients(), u in -0.8..0.8f64, v in -0.8..0.8f64) {
        let m = graph("g", c);
        let j = m.evaluate_jet(ParamPoint::new(u, v), 2).unwrap();
        let r = invariant_record(&j).unwrap();
        let s = r.nu_prime.abs() + r.nu_doubleprime.abs();
        prop_assert!(close(r.k, r.nu_prime * r.nu_doubleprime, s * s));
        prop_assert!(close(r.kappa, 0.5 * (r.nu_prime + r.nu_doubleprime), s));
        prop_assert!(r.kappa * r.kappa - r.k >= -1e-12 * (1.0 + s * s));
        // K + |κ| ≤ ‖H‖²
        prop_assert!(r.gauss_k + r.kappa.abs() <= r.h_norm * r.h_norm + 1e-12 * (1.0 + s * s));
        let e = curvature_ellipse(&j).unwrap();
        prop_assert!((e.area - 0.5 * std::f64::consts::PI * r.kappa.abs()).abs() <= 1e-9 * (1.0 + s));
    }

    #[test]
    fn grid_text_round_trip(
        nu in 2usize..6,
        nv in 2usize..6,
        du in 0.01..1.0f64,
        dv in 0.01..1.0f64,
        seed in prop::collection::vec(-1e3..1e3f64, 10),
    ) {
        let mut g = InvariantFieldGrid::zeros(nu, nv, du, dv).unwrap();
        for (f, field) in g.fields.iter_mut().enumerate() {
            for (k, x) in field.iter_mut().enumerate() {
                *x = seed[f] * (1.0 + k as f64).sqrt() / 7.0;
            }
        }
        g.fields[0].iter_mut().for_each(|x| *x = x.abs() + 0.1);
        g.fields[1].iter_mut().for_each(|x| *x = x.abs() + 0.1);
        let mut text = Vec::new();
        write_grid(&g, &mut text).unwrap();
        let back = parse_grid(std::str::from_utf8(&text).unwrap()).unwrap();
        prop_assert_eq!(back.nu, nu);
        prop_assert_eq!(back.du, du);
        prop_assert_eq!(&back.fields, &g.fields);
    }

    #[test]
    fn csv4d_round_trip(points in prop::collection::vec(prop::array::uniform4(-1e6..1e6f64), 6)) {
        let patch = SampledPatch {
            nu: 2,
            nv: 3,
            params: (0..6).map(|k| ParamPoint::new((k / 3) as f64, 0.5 * (k % 3) as f64)).collect(),
            positions: points.iter().map(|p| Vec4::from(*p)).collect(),
        };
        let mut text = Vec::new();
        write_csv4d(&patch, &mut text).unwrap();
        let back = parse_csv4d(std::str::from_utf8(&text).unwrap()).unwrap();
        prop_assert_eq!(back, patch);
    }

    #[test]
    fn alignment_recovers_motions(
        entries in prop::collection::vec(-1.0..1.0f64, 16),
        shift in prop::array::uniform4(-5.0..5.0f64),
        cloud in prop::collection::vec(prop::array::uniform4(-1.0..1.0f64), 8..20),
    ) {
        let rot = orthogonal(&entries, true);
        let reference: Vec<Vec4> = cloud.iter().map(|p| Vec4::from(*p)).collect();
        let t = Vec4::from(shift);
        let candidate: Vec<Vec4> = reference.iter().map(|p| rot * p + t).collect();
        let a = rigid_align(&candidate, &reference).unwrap();
        prop_assert!(a.rms < 1e-10);
        prop_assert!((a.rotation - rot).amax() < 1e-8);
    }
}
