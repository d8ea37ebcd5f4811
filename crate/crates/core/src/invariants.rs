//! Pointwise invariants: fundamental forms, normal frame, `L, M, N`, the
//! Weingarten-type map, `k`, `κ`, `K`, `H`, conjugacy, principal and
//! asymptotic directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface::{det4, ParamPoint, SurfaceJet, Vec4};
use crate::tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstFundamental {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// `sqrt(EG - F²)`
    pub w: f64,
}

impl FirstFundamental {
    pub fn of(jet: &SurfaceJet) -> Self {
        let (e, f, g) = jet.first_fundamental();
        FirstFundamental {
            e,
            f,
            g,
            w: (e * g - f * f).sqrt(),
        }
    }

    /// `I(λ, μ)`
    pub fn quadratic(&self, d: TangentDirection) -> f64 {
        self.e * d.lambda * d.lambda + 2.0 * self.f * d.lambda * d.mu + self.g * d.mu * d.mu
    }
}

/// Orthonormal basis of the normal plane with `det(z_u, z_v, e1, e2) > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalFrame {
    pub e1: Vec4,
    pub e2: Vec4,
}

impl NormalFrame {
    /// Rotate the frame by `theta` inside the normal plane.
    pub fn rotated(&self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        NormalFrame {
            e1: self.e1 * c + self.e2 * s,
            e2: self.e2 * c - self.e1 * s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondFundamentalData {
    /// `c[row][k]` with rows `(uu), (uv), (vv)` and normal index `k`.
    pub c: [[f64; 2]; 3],
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl SecondFundamentalData {
    /// `II(λ1, μ1; λ2, μ2)`
    pub fn bilinear(&self, a: TangentDirection, b: TangentDirection) -> f64 {
        self.l * a.lambda * b.lambda + self.m * (a.lambda * b.mu + a.mu * b.lambda) + self.n * a.mu * b.mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    Flat,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// A tangent `λ z_u + μ z_v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentDirection {
    pub lambda: f64,
    pub mu: f64,
}

impl TangentDirection {
    pub fn new(lambda: f64, mu: f64) -> Self {
        TangentDirection { lambda, mu }
    }

    pub fn is_zero(&self) -> bool {
        self.lambda == 0.0 && self.mu == 0.0
    }

    /// Rescaled so that `I(λ, μ) = 1`.
    pub fn unit(&self, first: &FirstFundamental) -> Result<Self> {
        let q = first.quadratic(*self);
        if self.is_zero() || !(q > 0.0) {
            return Err(Error::ZeroDirection);
        }
        let s = q.sqrt();
        Ok(TangentDirection::new(self.lambda / s, self.mu / s))
    }

    pub fn ambient(&self, jet: &SurfaceJet) -> Vec4 {
        jet.z_u * self.lambda + jet.z_v * self.mu
    }

    /// The `I`-orthogonal direction `(-(Fλ + Gμ), Eλ + Fμ)`.
    pub fn perpendicular(&self, first: &FirstFundamental) -> Self {
        TangentDirection::new(
            -(first.f * self.lambda + first.g * self.mu),
            first.e * self.lambda + first.f * self.mu,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub point: ParamPoint,
    pub first: FirstFundamental,
    pub second: SecondFundamentalData,
    /// `[[γ₁¹, γ₁²], [γ₂¹, γ₂²]]`
    pub gamma_matrix: [[f64; 2]; 2],
    pub k: f64,
    pub kappa: f64,
    /// Gauss curvature.
    pub gauss_k: f64,
    pub h: [f64; 4],
    pub h_norm: f64,
    pub nu_prime: f64,
    pub nu_doubleprime: f64,
    pub point_class: PointClass,
}

impl InvariantRecord {
    /// `κ² - k` recomputed from the principal normal curvatures, which avoids
    /// the cancellation in the direct difference.
    pub fn umbilic_gap(&self) -> f64 {
        let half = 0.5 * (self.nu_prime - self.nu_doubleprime);
        half * half
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrincipalDirections {
    /// Unit principal tangents, ordered by angle.
    Pair(TangentDirection, TangentDirection),
    /// `κ² = k`: every tangent is principal.
    AllPrincipal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AsymptoticDirections {
    None,
    One(TangentDirection),
    Two(TangentDirection, TangentDirection),
    /// Flat point: every tangent is asymptotic.
    All,
}

impl AsymptoticDirections {
    pub fn count(&self) -> Option<usize> {
        match self {
            AsymptoticDirections::None => Some(0),
            AsymptoticDirections::One(_) => Some(1),
            AsymptoticDirections::Two(_, _) => Some(2),
            AsymptoticDirections::All => None,
        }
    }
}

/// Orthonormal tangent basis `x̂ = z_u/√E`, `ŷ` the Gram-Schmidt
/// completion of `z_v`. Positively oriented with respect to `(z_u, z_v)`.
pub fn tangent_basis(jet: &SurfaceJet) -> (Vec4, Vec4) {
    let first = FirstFundamental::of(jet);
    let se = first.e.sqrt();
    let x = jet.z_u / se;
    let y = (jet.z_v * first.e - jet.z_u * first.f) / (se * first.w);
    (x, y)
}

/// Orthogonal projection onto the normal plane.
pub fn normal_part(jet: &SurfaceJet, w: &Vec4) -> Vec4 {
    let (x, y) = tangent_basis(jet);
    w - x * x.dot(w) - y * y.dot(w)
}

/// Deterministic normal frame.
///
/// Among the six pairs of ambient basis vectors, the pair whose normal
/// projections span the largest area is orthonormalized; `e2` is flipped if
/// needed for positive orientation.
pub fn normal_frame(jet: &SurfaceJet) -> NormalFrame {
    let basis: [Vec4; 4] = [Vec4::x(), Vec4::y(), Vec4::z(), Vec4::w()];
    let proj: Vec<Vec4> = basis.iter().map(|b| normal_part(jet, b)).collect();
    let mut best = (0usize, 1usize, f64::NEG_INFINITY);
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (a, b) = (&proj[i], &proj[j]);
            let gram = a.norm_squared() * b.norm_squared() - a.dot(b).powi(2);
            if gram > best.2 {
                best = (i, j, gram);
            }
        }
    }
    let e1 = proj[best.0].normalize();
    let mut e2 = proj[best.1] - e1 * e1.dot(&proj[best.1]);
    // one re-orthogonalization pass against the tangent plane and e1
    e2 = normal_part(jet, &e2);
    e2 -= e1 * e1.dot(&e2);
    let mut e2 = e2.normalize();
    if det4(&jet.z_u, &jet.z_v, &e1, &e2) < 0.0 {
        e2 = -e2;
    }
    NormalFrame { e1, e2 }
}

/// `c`-coefficients, oriented areas and `L, M, N` with respect to `frame`.
pub fn fundamental_data(jet: &SurfaceJet, frame: &NormalFrame) -> (FirstFundamental, SecondFundamentalData) {
    let first = FirstFundamental::of(jet);
    let row = |w: &Vec4| [w.dot(&frame.e1), w.dot(&frame.e2)];
    let c = [row(&jet.z_uu), row(&jet.z_uv), row(&jet.z_vv)];
    let area = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let delta1 = area(c[0], c[1]);
    let delta2 = area(c[0], c[2]);
    let delta3 = area(c[1], c[2]);
    let second = SecondFundamentalData {
        c,
        delta1,
        delta2,
        delta3,
        l: 2.0 * delta1 / first.w,
        m: delta2 / first.w,
        n: 2.0 * delta3 / first.w,
    };
    (first, second)
}

/// Second fundamental form `σ(x̂,x̂), σ(x̂,ŷ), σ(ŷ,ŷ)` on the orthonormal
/// tangent basis of [`tangent_basis`].
pub fn sigma_orthonormal(jet: &SurfaceJet) -> (Vec4, Vec4, Vec4) {
    let first = FirstFundamental::of(jet);
    let (e, f, w) = (first.e, first.f, first.w);
    let s11 = normal_part(jet, &jet.z_uu);
    let s12 = normal_part(jet, &jet.z_uv);
    let s22 = normal_part(jet, &jet.z_vv);
    let sxx = s11 / e;
    let sxy = (s12 * e - s11 * f) / (e * w);
    let syy = (s22 * (e * e) - s12 * (2.0 * e * f) + s11 * (f * f)) / (e * w * w);
    (sxx, sxy, syy)
}

/// `(L̂, M̂, N̂)` of the orthonormal tangent basis, where `II` is an
/// ordinary symmetric matrix.
fn second_form_orthonormal(jet: &SurfaceJet, frame: &NormalFrame) -> (f64, f64, f64) {
    let (sxx, sxy, syy) = sigma_orthonormal(jet);
    let row = |w: &Vec4| [w.dot(&frame.e1), w.dot(&frame.e2)];
    let (a, b, c) = (row(&sxx), row(&sxy), row(&syy));
    let area = |p: [f64; 2], q: [f64; 2]| p[0] * q[1] - p[1] * q[0];
    (2.0 * area(a, b), area(a, c), 2.0 * area(b, c))
}

fn flatness_threshold(jet: &SurfaceJet) -> f64 {
    tolerances::FLAT * (1.0 + jet.scale().powi(2))
}

/// Eigen-decomposition of `II` in the orthonormal basis: returns the angle of
/// each principal direction in `[0, π)` (smaller first), the corresponding
/// normal curvatures and the eigenvalue gap `ν_max - ν_min`.
fn principal_angles(l: f64, m: f64, n: f64) -> ([f64; 2], [f64; 2], f64) {
    let gap = 2.0 * (0.5 * (l - n)).hypot(m);
    let theta_max = 0.5 * (2.0 * m).atan2(l - n);
    let wrap = |t: f64| t.rem_euclid(std::f64::consts::PI);
    let a = wrap(theta_max);
    let b = wrap(theta_max + std::f64::consts::FRAC_PI_2);
    let nu = |t: f64| {
        let (s, c) = t.sin_cos();
        l * c * c + 2.0 * m * s * c + n * s * s
    };
    if a <= b {
        ([a, b], [nu(a), nu(b)], gap)
    } else {
        ([b, a], [nu(b), nu(a)], gap)
    }
}

fn is_umbilic(gap: f64, kappa: f64, k: f64) -> bool {
    0.25 * gap * gap < tolerances::UMBILIC * (kappa * kappa + k.abs() + 1.0)
}

fn direction_from_angle(first: &FirstFundamental, theta: f64) -> TangentDirection {
    let (s, c) = theta.sin_cos();
    let se = first.e.sqrt();
    TangentDirection::new(c / se - s * first.f / (se * first.w), s * se / first.w)
}

/// All pointwise invariants at the jet's point.
pub fn invariant_record(jet: &SurfaceJet) -> Result<InvariantRecord> {
    jet.check_immersion()?;
    let frame = normal_frame(jet);
    let (first, second) = fundamental_data(jet, &frame);
    let (e, f, g) = (first.e, first.f, first.g);
    let (l, m, n) = (second.l, second.m, second.n);
    let w2 = first.w * first.w;
    let gamma_matrix = [
        [(f * m - g * l) / w2, (f * l - e * m) / w2],
        [(f * n - g * m) / w2, (f * m - e * n) / w2],
    ];
    let k = (l * n - m * m) / w2;
    let kappa = (e * n + g * l - 2.0 * f * m) / (2.0 * w2);

    let (sxx, sxy, syy) = sigma_orthonormal(jet);
    let gauss_k = sxx.dot(&syy) - sxy.norm_squared();
    let h = (sxx + syy) * 0.5;

    let (lo, mo, no) = second_form_orthonormal(jet, &frame);
    let (_, nus, gap) = principal_angles(lo, mo, no);
    let (nu_prime, nu_doubleprime) = if is_umbilic(gap, kappa, k) {
        (kappa, kappa)
    } else {
        (nus[0], nus[1])
    };

    let tol = flatness_threshold(jet);
    let point_class = if l.abs().max(m.abs()).max(n.abs()) < tol {
        PointClass::Flat
    } else if k.abs() < tol {
        PointClass::Parabolic
    } else if k > 0.0 {
        PointClass::Elliptic
    } else {
        PointClass::Hyperbolic
    };

    Ok(InvariantRecord {
        point: jet.point,
        first,
        second,
        gamma_matrix,
        k,
        kappa,
        gauss_k,
        h: [h[0], h[1], h[2], h[3]],
        h_norm: h.norm(),
        nu_prime,
        nu_doubleprime,
        point_class,
    })
}

fn first_and_second(jet: &SurfaceJet) -> (FirstFundamental, SecondFundamentalData) {
    fundamental_data(jet, &normal_frame(jet))
}

/// Conjugacy invariant `ζ(g1, g2) = II(g1, g2) / (|g1| |g2|)`.
pub fn zeta(jet: &SurfaceJet, g1: TangentDirection, g2: TangentDirection) -> Result<f64> {
    if g1.is_zero() || g2.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let (first, second) = first_and_second(jet);
    Ok(second.bilinear(g1, g2) / (first.quadratic(g1).sqrt() * first.quadratic(g2).sqrt()))
}

/// `ν_g = II / I`.
pub fn normal_curvature(jet: &SurfaceJet, g: TangentDirection) -> Result<f64> {
    zeta(jet, g, g)
}

/// Geodesic torsion `α_g` in closed form.
pub fn geodesic_torsion(jet: &SurfaceJet, g: TangentDirection) -> Result<f64> {
    if g.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let (first, s) = first_and_second(jet);
    let (e, f, gg) = (first.e, first.f, first.g);
    let (lam, mu) = (g.lambda, g.mu);
    let num = lam * lam * (e * s.m - f * s.l) + lam * mu * (e * s.n - gg * s.l) + mu * mu * (f * s.n - gg * s.m);
    Ok(num / (first.w * first.quadratic(g)))
}

/// Principal tangents, unit length, ordered by their angle in `[0, π)`
/// measured from `z_u` in the orthonormal basis of [`tangent_basis`].
pub fn principal_directions(jet: &SurfaceJet) -> Result<PrincipalDirections> {
    jet.check_immersion()?;
    let frame = normal_frame(jet);
    let (first, second) = fundamental_data(jet, &frame);
    let w2 = first.w * first.w;
    let k = (second.l * second.n - second.m * second.m) / w2;
    let kappa = (first.e * second.n + first.g * second.l - 2.0 * first.f * second.m) / (2.0 * w2);
    let (lo, mo, no) = second_form_orthonormal(jet, &frame);
    let (angles, _, gap) = principal_angles(lo, mo, no);
    if is_umbilic(gap, kappa, k) {
        return Ok(PrincipalDirections::AllPrincipal);
    }
    Ok(PrincipalDirections::Pair(
        direction_from_angle(&first, angles[0]),
        direction_from_angle(&first, angles[1]),
    ))
}

/// Unit principal tangents as ambient vectors `(x, y)`, with `y` the
/// positive rotation of `x` in the tangent plane.
pub fn principal_vectors(jet: &SurfaceJet) -> Result<(Vec4, Vec4)> {
    match principal_directions(jet)? {
        PrincipalDirections::Pair(a, _) => {
            let (xh, yh) = tangent_basis(jet);
            let x = a.ambient(jet);
            let (c, s) = (x.dot(&xh), x.dot(&yh));
            Ok((x, yh * c - xh * s))
        }
        PrincipalDirections::AllPrincipal => {
            let gap = invariant_record(jet)?.umbilic_gap();
            Err(Error::MinimalPoint { point: jet.point, gap })
        }
    }
}

/// Real roots of `Lλ² + 2Mλμ + Nμ² = 0`.
pub fn asymptotic_directions(jet: &SurfaceJet) -> Result<AsymptoticDirections> {
    jet.check_immersion()?;
    let (first, s) = first_and_second(jet);
    let tol = flatness_threshold(jet);
    let (l, m, n) = (s.l, s.m, s.n);
    if l.abs().max(m.abs()).max(n.abs()) < tol {
        return Ok(AsymptoticDirections::All);
    }
    let disc = m * m - l * n;
    let unit = |lam: f64, mu: f64| TangentDirection::new(lam, mu).unit(&first);
    if disc.abs() < tol * tol.max(l.abs().max(n.abs()).max(m.abs()).powi(2)).max(tol) {
        // double root
        let d = if l.abs() >= n.abs() { unit(-m, l)? } else { unit(n, -m)? };
        return Ok(AsymptoticDirections::One(d));
    }
    if disc < 0.0 {
        return Ok(AsymptoticDirections::None);
    }
    let r = disc.sqrt();
    // roots of L λ² + 2M λμ + N μ² = 0 in the cancellation-free form
    // λ : μ = q : L = N : q with q = -(M + sign(M) √disc) ≠ 0
    let q = -(m + m.signum() * r);
    let (a, b) = ((q, l), (n, q));
    Ok(AsymptoticDirections::Two(unit(a.0, a.1)?, unit(b.0, b.1)?))
}

/// `(ν', ν'')`: normal curvatures of the ordered principal tangents; equal to
/// `κ` when every tangent is principal.
pub fn principal_normal_curvatures(jet: &SurfaceJet) -> Result<(f64, f64)> {
    let r = invariant_record(jet)?;
    Ok((r.nu_prime, r.nu_doubleprime))
}

/// Normal-connection curvature from the shape operators: the `y`-component
/// of `(A₂A₁ - A₁A₂) x` on an orthonormal tangent basis.
pub fn normal_connection_commutator(jet: &SurfaceJet) -> Result<f64> {
    jet.check_immersion()?;
    let frame = normal_frame(jet);
    let (sxx, sxy, syy) = sigma_orthonormal(jet);
    let shape = |e: &Vec4| nalgebra::Matrix2::new(sxx.dot(e), sxy.dot(e), sxy.dot(e), syy.dot(e));
    let a1 = shape(&frame.e1);
    let a2 = shape(&frame.e2);
    let c = a2 * a1 - a1 * a2;
    Ok(c[(1, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn jet(name: &str, params: &[f64], u: f64, v: f64) -> SurfaceJet {
        catalog(name, params)
            .unwrap()
            .evaluate_jet(ParamPoint::new(u, v), 3)
            .unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn normal_frame_is_orthonormal_and_positive() {
        for (name, params, u, v) in [
            ("clifford_torus", vec![1.0], 0.0, 0.0),
            ("clifford_torus", vec![1.0], 0.4, 2.1),
            ("sphere3", vec![1.0], 0.3, 0.2),
            ("holomorphic_graph", vec![], 0.0, 0.0),
            ("generic_graph", vec![], -0.3, 0.6),
        ] {
            let j = jet(name, &params, u, v);
            let nf = normal_frame(&j);
            for w in [j.z_u, j.z_v] {
                assert!(nf.e1.dot(&w).abs() < 1e-13 && nf.e2.dot(&w).abs() < 1e-13);
            }
            assert!(close(nf.e1.norm(), 1.0, 1e-14) && close(nf.e2.norm(), 1.0, 1e-14));
            assert!(nf.e1.dot(&nf.e2).abs() < 1e-14);
            assert!(det4(&j.z_u, &j.z_v, &nf.e1, &nf.e2) > 0.0);
        }
    }

    #[test]
    fn normal_frame_survives_tangent_plane_without_good_axis_pair() {
        // tangent plane spanned by (e1 - e2) and (e3 - e4): the two
        // smallest-tangential-component axes project onto parallel normals
        let m = crate::surface::SurfaceModel::analytic(
            "skew_plane",
            crate::surface::Domain::new((-1.0, 1.0), (-1.0, 1.0)),
            |u, v| [u, -u, v + u * u, -v],
        );
        let j = m.evaluate_jet(ParamPoint::new(0.0, 0.0), 2).unwrap();
        let nf = normal_frame(&j);
        assert!(nf.e1.dot(&nf.e2).abs() < 1e-14);
        assert!(close(nf.e2.norm(), 1.0, 1e-14));
    }

    #[test]
    fn holomorphic_normal_plane_at_origin() {
        let j = jet("holomorphic_graph", &[], 0.0, 0.0);
        let nf = normal_frame(&j);
        for e in [nf.e1, nf.e2] {
            assert!(e[0].abs() < 1e-15 && e[1].abs() < 1e-15);
        }
    }

    #[test]
    fn clifford_torus_fundamental_data() {
        for (u, v) in [(0.0, 0.0), (1.1, -0.4), (3.0, 5.0)] {
            let j = jet("clifford_torus", &[1.0], u, v);
            let (first, s) = fundamental_data(&j, &normal_frame(&j));
            assert!(close(first.e, 1.0, 1e-14) && close(first.g, 1.0, 1e-14));
            assert!(first.f.abs() < 1e-14 && close(first.w, 1.0, 1e-14));
            assert!(s.l.abs() < 1e-14 && s.n.abs() < 1e-14);
            assert!(close(s.m, -1.0, 1e-14), "M = {}", s.m);
        }
    }

    #[test]
    fn holomorphic_fundamental_data_at_origin() {
        let j = jet("holomorphic_graph", &[], 0.0, 0.0);
        let (_, s) = fundamental_data(&j, &normal_frame(&j));
        assert!(close(s.delta1, 4.0, 1e-14) && close(s.delta3, 4.0, 1e-14));
        assert!(s.delta2.abs() < 1e-14);
        assert!(close(s.l, 8.0, 1e-13) && close(s.n, 8.0, 1e-13) && s.m.abs() < 1e-13);
    }

    #[test]
    fn fundamental_data_is_frame_independent() {
        let j = jet("generic_graph", &[], 0.35, -0.2);
        let nf = normal_frame(&j);
        let (_, s0) = fundamental_data(&j, &nf);
        for theta in [0.3, 1.7, -2.9] {
            let (_, s) = fundamental_data(&j, &nf.rotated(theta));
            for (a, b) in [(s.l, s0.l), (s.m, s0.m), (s.n, s0.n)] {
                assert!(close(a, b, 1e-13 * (1.0 + b.abs())));
            }
        }
    }

    #[test]
    fn golden_records() {
        let r = invariant_record(&jet("clifford_torus", &[1.0], 0.7, 0.2)).unwrap();
        assert!(close(r.k, -1.0, 1e-12) && r.kappa.abs() < 1e-12 && r.gauss_k.abs() < 1e-12);
        assert!(close(r.h_norm, FRAC_1_SQRT_2, 1e-12));
        assert_eq!(r.point_class, PointClass::Hyperbolic);

        let r = invariant_record(&jet("holomorphic_graph", &[], 0.0, 0.0)).unwrap();
        assert!(close(r.k, 64.0, 1e-11) && close(r.kappa, 8.0, 1e-12));
        assert!(close(r.gauss_k, -8.0, 1e-12) && r.h_norm < 1e-12);
        assert_eq!(r.point_class, PointClass::Elliptic);

        let r = invariant_record(&jet("sphere3", &[1.0], 0.3, 1.0)).unwrap();
        assert!(r.k.abs() < 1e-14 && r.kappa.abs() < 1e-14);
        assert_eq!(r.point_class, PointClass::Flat);
        assert!(close(r.gauss_k, 1.0, 1e-12));
    }

    #[test]
    fn gamma_map_trace_and_determinant() {
        let r = invariant_record(&jet("generic_graph", &[], 0.4, 0.1)).unwrap();
        let g = r.gamma_matrix;
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        assert!(close(det, r.k, 1e-12 * (1.0 + r.k.abs())));
        assert!(close(-(g[0][0] + g[1][1]) / 2.0, r.kappa, 1e-12));
    }

    #[test]
    fn zeta_examples() {
        let j = jet("clifford_torus", &[1.0], 0.5, 0.5);
        let (e1, e2, diag) = (
            TangentDirection::new(1.0, 0.0),
            TangentDirection::new(0.0, 1.0),
            TangentDirection::new(1.0, 1.0),
        );
        assert!(close(zeta(&j, e1, e2).unwrap(), -1.0, 1e-13));
        assert!(close(zeta(&j, diag, diag).unwrap(), -1.0, 1e-13));
        assert!(normal_curvature(&j, e1).unwrap().abs() < 1e-13);
        assert!(geodesic_torsion(&j, diag).unwrap().abs() < 1e-13);
        assert!(matches!(
            zeta(&j, TangentDirection::new(0.0, 0.0), e1),
            Err(Error::ZeroDirection)
        ));

        let rot = jet("rotation_general", &[0.5, 1.0], 0.8, 0.3);
        assert!(zeta(&rot, e1, e2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn minimal_point_has_zero_torsion_everywhere() {
        let j = jet("holomorphic_graph", &[], 0.0, 0.0);
        for d in [(1.0, 0.0), (0.3, -2.0), (1.0, 1.0)] {
            assert!(geodesic_torsion(&j, TangentDirection::new(d.0, d.1)).unwrap().abs() < 1e-13);
        }
        assert_eq!(principal_directions(&j).unwrap(), PrincipalDirections::AllPrincipal);
        let (a, b) = principal_normal_curvatures(&j).unwrap();
        assert!(close(a, 8.0, 1e-12) && close(b, 8.0, 1e-12));
        assert_eq!(asymptotic_directions(&j).unwrap(), AsymptoticDirections::None);
    }

    #[test]
    fn clifford_principal_and_asymptotic_directions() {
        let j = jet("clifford_torus", &[1.0], 0.2, 0.9);
        let PrincipalDirections::Pair(a, b) = principal_directions(&j).unwrap() else {
            panic!("torus points are not umbilic");
        };
        let s = FRAC_1_SQRT_2;
        assert!(close(a.lambda, s, 1e-13) && close(a.mu, s, 1e-13));
        assert!(close(b.lambda, -s, 1e-13) && close(b.mu, s, 1e-13));
        let (n1, n2) = principal_normal_curvatures(&j).unwrap();
        assert!(close(n1, -1.0, 1e-13) && close(n2, 1.0, 1e-13));

        let AsymptoticDirections::Two(p, q) = asymptotic_directions(&j).unwrap() else {
            panic!("hyperbolic point");
        };
        let found =
            |d: TangentDirection, l: f64, m: f64| close(d.lambda.abs(), l, 1e-13) && close(d.mu.abs(), m, 1e-13);
        assert!((found(p, 1.0, 0.0) && found(q, 0.0, 1.0)) || (found(p, 0.0, 1.0) && found(q, 1.0, 0.0)));
    }

    #[test]
    fn principal_parameterization_gives_coordinate_directions() {
        let j = jet("rotation_general", &[0.5, 1.0], 0.9, 1.3);
        let PrincipalDirections::Pair(a, b) = principal_directions(&j).unwrap() else {
            panic!("not umbilic");
        };
        let first = FirstFundamental::of(&j);
        let along_u = |d: TangentDirection| d.mu.abs() < 1e-12 && close(d.lambda.abs(), 1.0 / first.e.sqrt(), 1e-12);
        let along_v = |d: TangentDirection| d.lambda.abs() < 1e-12 && close(d.mu.abs(), 1.0 / first.g.sqrt(), 1e-12);
        assert!((along_u(a) && along_v(b)) || (along_v(a) && along_u(b)));
    }

    #[test]
    fn parabolic_point_has_one_asymptotic_direction() {
        // graph (u, v, u², uv): at the origin L = 4, M = N = 0
        let m = crate::surface::SurfaceModel::analytic(
            "parabolic",
            crate::surface::Domain::new((-1.0, 1.0), (-1.0, 1.0)),
            |u, v| [u, v, u * u, u * v],
        );
        let j = m.evaluate_jet(ParamPoint::new(0.0, 0.0), 2).unwrap();
        let r = invariant_record(&j).unwrap();
        assert_eq!(r.point_class, PointClass::Parabolic);
        let AsymptoticDirections::One(d) = asymptotic_directions(&j).unwrap() else {
            panic!("expected a single asymptotic direction");
        };
        assert!(d.lambda.abs() < 1e-14 && close(d.mu.abs(), 1.0, 1e-14));
    }

    #[test]
    fn flat_point_curvatures_vanish() {
        let j = jet("sphere3", &[1.0], -0.5, 2.0);
        assert_eq!(principal_normal_curvatures(&j).unwrap(), (0.0, 0.0));
        assert_eq!(asymptotic_directions(&j).unwrap(), AsymptoticDirections::All);
    }

    #[test]
    fn commutator_examples() {
        assert!(
            normal_connection_commutator(&jet("clifford_torus", &[1.0], 0.3, 0.3))
                .unwrap()
                .abs()
                < 1e-13
        );
        let c = normal_connection_commutator(&jet("holomorphic_graph", &[], 0.0, 0.0)).unwrap();
        assert!(close(c, 8.0, 1e-12), "{c}");
        assert!(
            normal_connection_commutator(&jet("sphere3", &[1.0], 0.3, 0.3))
                .unwrap()
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn principal_vectors_are_positively_oriented() {
        let j = jet("generic_graph", &[], 0.2, 0.3);
        let (x, y) = principal_vectors(&j).unwrap();
        let nf = normal_frame(&j);
        assert!(close(x.norm(), 1.0, 1e-13) && close(y.norm(), 1.0, 1e-13) && x.dot(&y).abs() < 1e-13);
        assert!(det4(&x, &y, &nf.e1, &nf.e2) > 0.0);
    }
}
