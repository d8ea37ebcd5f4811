//! Meridian surfaces `z(u, v) = f(u) l(v) + g(u) e₄` on the rotational
//! hypersurface over the meridian `(f, g)`, where `l(v)` is an arc-length
//! curve on the unit sphere of `span{e₁, e₂, e₃}`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::surface::{Domain, SurfaceModel, Vec4};

/// Derivatives `[f, ḟ, f̈, f⃛]` of the profile at `u`.
pub type ProfileFn = dyn Fn(f64) -> [f64; 4] + Send + Sync;
pub type CurvatureFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Smallest admissible `ġ = √(1 - ḟ²)` and `f`, keeping the profile away
/// from the turning points where the square roots lose smoothness.
const MIN_GDOT: f64 = 0.05;
const MIN_F: f64 = 0.05;
/// Step of the tabulated profile ODE and of the spherical-curve samples.
const TABLE_STEP: f64 = 1e-3;
const G_TABLE_STEP: f64 = 1e-2;

// 5-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Meridian curve `(f, g)` with `ḟ² + ġ² = 1` and `ġ = +√(1 - ḟ²)`.
#[derive(Clone)]
pub struct Profile {
    f: Arc<ProfileFn>,
    pub u_range: (f64, f64),
    /// `(u, g(u))` on a uniform grid; `g` between nodes by quadrature.
    g_table: Arc<Vec<(f64, f64)>>,
}

impl std::fmt::Debug for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Profile")
            .field("u_range", &self.u_range)
            .finish_non_exhaustive()
    }
}

fn g_dot(fd: f64) -> f64 {
    (1.0 - fd * fd).max(0.0).sqrt()
}

impl Profile {
    /// Profile from `f` and its derivatives; `g` is the quadrature of
    /// `√(1 - ḟ²)` normalised by `g(u_ref) = g_ref`.
    pub fn new<F>(f: F, u_range: (f64, f64), u_ref: f64, g_ref: f64) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 4] + Send + Sync + 'static,
    {
        let (u0, u1) = u_range;
        if !(u0 < u1) || !(u0..=u1).contains(&u_ref) {
            return Err(Error::InvalidArgument(format!(
                "profile range ({u0}, {u1}) must be increasing and contain {u_ref}"
            )));
        }
        let n = ((u1 - u0) / 1e-3).ceil().max(16.0) as usize;
        for i in 0..=n {
            let u = u0 + (u1 - u0) * i as f64 / n as f64;
            let d = f(u);
            if !(d[0] > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "profile f({u}) = {} is not positive",
                    d[0]
                )));
            }
            if !(d[1].abs() < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "profile has |f'({u})| = {} >= 1",
                    d[1].abs()
                )));
            }
        }
        let f: Arc<ProfileFn> = Arc::new(f);
        let steps = ((u1 - u0) / G_TABLE_STEP).ceil().max(1.0) as usize;
        let nodes: Vec<f64> = (0..=steps).map(|i| u0 + (u1 - u0) * i as f64 / steps as f64).collect();
        let gd = |s: f64| g_dot(f(s)[1]);
        let mut acc = vec![0.0; nodes.len()];
        for i in 1..nodes.len() {
            acc[i] = acc[i - 1] + gauss_legendre(nodes[i - 1], nodes[i], gd);
        }
        let idx = (((u_ref - u0) / (u1 - u0)) * steps as f64).floor().min(steps as f64) as usize;
        let at_ref = acc[idx] + gauss_legendre(nodes[idx], u_ref, gd);
        let g_table = nodes.iter().zip(acc).map(|(&u, a)| (u, a - at_ref + g_ref)).collect();
        Ok(Profile {
            f,
            u_range,
            g_table: Arc::new(g_table),
        })
    }

    /// `f = sin u`, `g = -cos u` on `[0.3, π - 0.3]`: a unit circle, `κ_m = 1`.
    pub fn sine() -> Self {
        let u_range = (0.3, PI - 0.3);
        let u_ref = 0.5 * PI;
        Profile::new(
            |u| {
                let (s, c) = u.sin_cos();
                [s, c, -s, -c]
            },
            u_range,
            u_ref,
            -u_ref.cos(),
        )
        .expect("sine profile is admissible")
    }

    pub fn f_derivatives(&self, u: f64) -> [f64; 4] {
        (self.f)(u)
    }

    /// `[g, ġ, g̈, g⃛]` from `ġ = √(1 - ḟ²)`.
    pub fn g_derivatives(&self, u: f64) -> [f64; 4] {
        let [_, f1, f2, f3] = (self.f)(u);
        let g1 = g_dot(f1);
        let g2 = -f1 * f2 / g1;
        let g3 = -(f2 * f2 + f1 * f3 + g2 * g2) / g1;
        [self.g_value(u), g1, g2, g3]
    }

    fn g_value(&self, u: f64) -> f64 {
        let table = &self.g_table;
        let (u0, u1) = (table[0].0, table[table.len() - 1].0);
        let steps = (table.len() - 1) as f64;
        let i = (((u - u0) / (u1 - u0)) * steps).round().clamp(0.0, steps) as usize;
        let (un, gn) = table[i];
        gn + gauss_legendre(un, u, |s| g_dot((self.f)(s)[1]))
    }

    /// Meridian curvature `κ_m = ḟ g̈ - ġ f̈ = -f̈ / √(1 - ḟ²)`.
    pub fn kappa_m(&self, u: f64) -> f64 {
        let [_, f1, f2, _] = (self.f)(u);
        -f2 / g_dot(f1)
    }
}

/// Spherical curvature `κ(v)` of the curve `l(v)`.
#[derive(Clone)]
pub enum SphereCurvature {
    /// A circle of radius `1/√(1 + b²)`, in closed form.
    Constant(f64),
    /// `κ(v)` and `κ'(v)`, integrated numerically.
    Variable {
        kappa: Arc<CurvatureFn>,
        dkappa: Arc<CurvatureFn>,
    },
}

impl std::fmt::Debug for SphereCurvature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SphereCurvature::Constant(b) => write!(f, "Constant({b})"),
            SphereCurvature::Variable { .. } => write!(f, "Variable"),
        }
    }
}

impl SphereCurvature {
    pub fn variable<K, D>(kappa: K, dkappa: D) -> Self
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SphereCurvature::Variable {
            kappa: Arc::new(kappa),
            dkappa: Arc::new(dkappa),
        }
    }

    pub fn value(&self, v: f64) -> f64 {
        match self {
            SphereCurvature::Constant(b) => *b,
            SphereCurvature::Variable { kappa, .. } => kappa(v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match self {
            SphereCurvature::Constant(_) => 0.0,
            SphereCurvature::Variable { dkappa, .. } => dkappa(v),
        }
    }
}

/// Which family a spec came from, with its defining parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Sine,
    ConstantGauss { k: f64, alpha: f64, beta: f64 },
    Cmc { a: f64, b: f64, c: f64 },
    ConstantK { a: f64, b: f64, c: f64, branch: f64 },
    Custom,
}

#[derive(Clone, Debug)]
pub struct MeridianSpec {
    pub profile: Profile,
    pub kappa_c: SphereCurvature,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub family: Family,
}

impl MeridianSpec {
    pub fn new(profile: Profile, kappa_c: SphereCurvature, family: Family) -> Self {
        let u_range = profile.u_range;
        let v_range = default_v_range(&kappa_c);
        MeridianSpec {
            profile,
            kappa_c,
            u_range,
            v_range,
            family,
        }
    }

    /// `f = sin u`, `g = -cos u` with constant spherical curvature `b`.
    pub fn sine(b: f64) -> Self {
        MeridianSpec::new(Profile::sine(), SphereCurvature::Constant(b), Family::Sine)
    }

    pub fn with_curvature(mut self, kappa_c: SphereCurvature) -> Self {
        self.v_range = default_v_range(&kappa_c);
        self.kappa_c = kappa_c;
        self
    }

    pub fn with_v_range(mut self, v_range: (f64, f64)) -> Self {
        self.v_range = v_range;
        self
    }

    fn v_periodic(&self) -> bool {
        match self.kappa_c {
            SphereCurvature::Constant(b) => {
                let period = 2.0 * PI / (1.0 + b * b).sqrt();
                self.v_range.0 == 0.0 && self.v_range.1 == period
            }
            SphereCurvature::Variable { .. } => false,
        }
    }
}

fn default_v_range(kappa_c: &SphereCurvature) -> (f64, f64) {
    match kappa_c {
        SphereCurvature::Constant(b) => (0.0, 2.0 * PI / (1.0 + b * b).sqrt()),
        SphereCurvature::Variable { .. } => (0.0, 2.0 * PI),
    }
}

/// Frenet triple `(l, t, n)` of a spherical curve at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereFrame {
    pub l: Vector3<f64>,
    pub t: Vector3<f64>,
    pub n: Vector3<f64>,
}

impl SphereFrame {
    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_rows(&[self.l.transpose(), self.t.transpose(), self.n.transpose()])
    }

    fn from_matrix(m: &Matrix3<f64>) -> Self {
        SphereFrame {
            l: m.row(0).transpose(),
            t: m.row(1).transpose(),
            n: m.row(2).transpose(),
        }
    }

    /// Largest deviation of the Gram matrix of `(l, t, n)` from the identity.
    pub fn gram_defect(&self) -> f64 {
        let m = self.matrix();
        (m * m.transpose() - Matrix3::identity()).amax()
    }

    /// The triple `l = e₁`, `t = e₂`, `n = e₃`.
    pub fn standard() -> Self {
        SphereFrame {
            l: Vector3::x(),
            t: Vector3::y(),
            n: Vector3::z(),
        }
    }
}

/// Samples of the Frenet triple along a spherical curve.
#[derive(Clone, Debug)]
pub struct SphericalCurve {
    pub v0: f64,
    pub step: f64,
    pub frames: Vec<SphereFrame>,
    kappa: SphereCurvature,
}

fn sphere_generator(kappa: f64) -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, -1.0, 0.0, kappa, 0.0, -kappa, 0.0)
}

/// One fourth-order Magnus step of `F' = A(v) F` from `v` to `v + h`.
fn magnus_step(kappa: &SphereCurvature, v: f64, h: f64, frame: &Matrix3<f64>) -> Matrix3<f64> {
    let r = 3f64.sqrt() / 6.0;
    let a1 = sphere_generator(kappa.value(v + (0.5 - r) * h));
    let a2 = sphere_generator(kappa.value(v + (0.5 + r) * h));
    let omega = (a1 + a2) * (0.5 * h) + (a2 * a1 - a1 * a2) * (3f64.sqrt() / 12.0 * h * h);
    omega.exp() * frame
}

/// Integrate the spherical Frenet system over `v_range` from `initial` at
/// `v_range.0`, with an orthogonality-preserving exponential stepper.
pub fn spherical_curve(kappa: &SphereCurvature, v_range: (f64, f64), initial: SphereFrame) -> Result<SphericalCurve> {
    let defect = initial.gram_defect();
    if !(defect < 1e-10) {
        return Err(Error::BadInitialFrame(defect));
    }
    if initial.l.cross(&initial.t).dot(&initial.n) < 0.0 {
        return Err(Error::BadInitialFrame(2.0));
    }
    let (v0, v1) = v_range;
    if !(v1 > v0) {
        return Err(Error::InvalidArgument(format!("empty curve range ({v0}, {v1})")));
    }
    let steps = ((v1 - v0) / TABLE_STEP).ceil() as usize;
    let h = (v1 - v0) / steps as f64;
    let mut frames = Vec::with_capacity(steps + 1);
    let mut m = initial.matrix();
    frames.push(initial);
    for i in 0..steps {
        m = magnus_step(kappa, v0 + i as f64 * h, h, &m);
        frames.push(SphereFrame::from_matrix(&m));
    }
    Ok(SphericalCurve {
        v0,
        step: h,
        frames,
        kappa: kappa.clone(),
    })
}

impl SphericalCurve {
    /// Frame at any `v` in range: the nearest sample advanced by one step.
    pub fn frame_at(&self, v: f64) -> SphereFrame {
        let last = (self.frames.len() - 1) as f64;
        let i = ((v - self.v0) / self.step).round().clamp(0.0, last) as usize;
        let vi = self.v0 + i as f64 * self.step;
        let m = magnus_step(&self.kappa, vi, v - vi, &self.frames[i].matrix());
        SphereFrame::from_matrix(&m)
    }

    pub fn max_gram_defect(&self) -> f64 {
        self.frames.iter().map(|f| f.gram_defect()).fold(0.0, f64::max)
    }
}

/// Closed-form circle of spherical curvature `b` through `(r, 0, b r)`.
fn circle_frame(b: f64, v: f64) -> SphereFrame {
    let r = 1.0 / (1.0 + b * b).sqrt();
    let (s, c) = (v / r).sin_cos();
    SphereFrame {
        l: Vector3::new(r * c, r * s, b * r),
        t: Vector3::new(-s, c, 0.0),
        n: Vector3::new(-b * r * c, -b * r * s, r),
    }
}

enum CurveEval {
    Circle(f64),
    Samples(Arc<SphericalCurve>),
}

impl CurveEval {
    fn frame(&self, v: f64) -> SphereFrame {
        match self {
            CurveEval::Circle(b) => circle_frame(*b, v),
            CurveEval::Samples(curve) => curve.frame_at(v),
        }
    }
}

fn curve_evaluator(spec: &MeridianSpec) -> Result<CurveEval> {
    Ok(match &spec.kappa_c {
        SphereCurvature::Constant(b) => CurveEval::Circle(*b),
        k @ SphereCurvature::Variable { .. } => {
            // start a little before the range so the frame is defined on all of it
            let pad = 0.05 * (spec.v_range.1 - spec.v_range.0);
            let curve = spherical_curve(k, (spec.v_range.0 - pad, spec.v_range.1 + pad), SphereFrame::standard())?;
            CurveEval::Samples(Arc::new(curve))
        }
    })
}

/// The surface `f(u) l(v) + g(u) e₄` as an analytic model.
pub fn meridian_surface(spec: &MeridianSpec) -> Result<SurfaceModel> {
    let curve = curve_evaluator(spec)?;
    let profile = spec.profile.clone();
    let kappa = spec.kappa_c.clone();
    let domain = Domain::new(spec.u_range, spec.v_range).periodic(false, spec.v_periodic());
    Ok(SurfaceModel::analytic(
        format!("meridian_{}", family_label(&spec.family)),
        domain,
        move |u: Jet, v: Jet| {
            let f = u.compose(profile.f_derivatives(u.value()));
            let g = u.compose(profile.g_derivatives(u.value()));
            let vv = v.value();
            let fr = curve.frame(vv);
            let (k, dk) = (kappa.value(vv), kappa.derivative(vv));
            // l' = t, l'' = κn - l, l''' = κ'n - (κ² + 1)t
            let l2 = fr.n * k - fr.l;
            let l3 = fr.n * dk - fr.t * (k * k + 1.0);
            let comp = |i: usize| v.compose([fr.l[i], fr.t[i], l2[i], l3[i]]);
            [f * comp(0), f * comp(1), f * comp(2), g]
        },
    ))
}

pub fn family_label(family: &Family) -> &'static str {
    match family {
        Family::Sine => "sine",
        Family::ConstantGauss { .. } => "constant_K",
        Family::Cmc { .. } => "cmc",
        Family::ConstantK { .. } => "constant_k",
        Family::Custom => "custom",
    }
}

/// Closed-form invariants of a meridian surface at `(u, v)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeridianInvariants {
    pub kappa_m: f64,
    pub kappa_c: f64,
    pub k: f64,
    pub kappa: f64,
    pub gauss_k: f64,
    pub h_norm: f64,
    /// `H · n₁` and `H · n₂`.
    pub h_n1: f64,
    pub h_n2: f64,
    /// `M = -κ_m κ` (and `L = N = 0`).
    pub m: f64,
}

pub fn closed_form_invariants(spec: &MeridianSpec, u: f64, v: f64) -> MeridianInvariants {
    let [f, _, _, _] = spec.profile.f_derivatives(u);
    let gd = spec.profile.g_derivatives(u)[1];
    let km = spec.profile.kappa_m(u);
    let kc = spec.kappa_c.value(v);
    let h_n1 = kc / (2.0 * f);
    let h_n2 = (gd + f * km) / (2.0 * f);
    MeridianInvariants {
        kappa_m: km,
        kappa_c: kc,
        k: -(km * km * kc * kc) / (f * f),
        kappa: 0.0,
        gauss_k: km * gd / f,
        h_norm: h_n1.hypot(h_n2),
        h_n1,
        h_n2,
        m: -km * kc,
    }
}

/// The module's frame `{x, y, n₁, n₂}` at `(u, v)`:
/// `x = z_u`, `y = t`, `n₁ = n`, `n₂ = -ġ l + ḟ e₄`.
pub fn meridian_frame(spec: &MeridianSpec, u: f64, v: f64) -> Result<[Vec4; 4]> {
    let fr = curve_evaluator(spec)?.frame(v);
    let lift = |w: Vector3<f64>| Vec4::new(w[0], w[1], w[2], 0.0);
    let fd = spec.profile.f_derivatives(u)[1];
    let gd = spec.profile.g_derivatives(u)[1];
    let (l, t, n) = (lift(fr.l), lift(fr.t), lift(fr.n));
    let e4 = Vec4::w();
    Ok([l * fd + e4 * gd, t, n, -l * gd + e4 * fd])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeridianClass {
    /// `κ ≡ 0`: great circle, planar surface.
    GreatCircle,
    /// `κ_m ≡ 0`: straight meridian, developable ruled surface.
    StraightMeridian,
    /// `κ_m κ ≠ 0` everywhere sampled.
    General,
    /// Neither identically zero nor nowhere zero on the sampled grid.
    Mixed,
}

pub fn classify(spec: &MeridianSpec, samples: usize) -> MeridianClass {
    let n = samples.max(2);
    let grid = |(a, b): (f64, f64)| (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64);
    let tol = 1e-12;
    let kc: Vec<f64> = grid(spec.v_range).map(|v| spec.kappa_c.value(v).abs()).collect();
    let km: Vec<f64> = grid(spec.u_range).map(|u| spec.profile.kappa_m(u).abs()).collect();
    if kc.iter().all(|&x| x < tol) {
        MeridianClass::GreatCircle
    } else if km.iter().all(|&x| x < tol) {
        MeridianClass::StraightMeridian
    } else if kc.iter().chain(&km).all(|&x| x >= tol) {
        MeridianClass::General
    } else {
        MeridianClass::Mixed
    }
}

/// Largest connected run of `true` on a uniform grid of `[a, b]`, preferring
/// the run that contains `seed`. Returns the interval between the first and
/// last admissible nodes of that run.
fn admissible_interval(
    (a, b): (f64, f64),
    n: usize,
    seed: Option<f64>,
    ok: impl Fn(f64) -> bool,
) -> Option<(f64, f64)> {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &x) in xs.iter().enumerate() {
        match (ok(x), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, n));
    }
    let runs: Vec<(usize, usize)> = runs.into_iter().filter(|(s, e)| e > s).collect();
    let chosen = seed
        .and_then(|t| runs.iter().find(|(s, e)| xs[*s] <= t && t <= xs[*e]))
        .or_else(|| runs.iter().max_by_key(|(s, e)| e - s))?;
    Some((xs[chosen.0], xs[chosen.1]))
}

/// Constant Gauss curvature `K ≠ 0`:
/// `f = α cos √K u + β sin √K u` (`K > 0`) or the `cosh / sinh` form
/// (`K < 0`), paired with `κ ≡ 1`.
pub fn constant_k_gauss_profile(k: f64, alpha: f64, beta: f64) -> Result<MeridianSpec> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidArgument(
            "constant Gauss curvature must be non-zero".into(),
        ));
    }
    let w = k.abs().sqrt();
    let f = move |u: f64| -> [f64; 4] {
        let x = w * u;
        if k > 0.0 {
            let (s, c) = x.sin_cos();
            let f0 = alpha * c + beta * s;
            let f1 = w * (-alpha * s + beta * c);
            [f0, f1, -k * f0, -k * f1]
        } else {
            let (s, c) = (x.sinh(), x.cosh());
            let f0 = alpha * c + beta * s;
            let f1 = w * (alpha * s + beta * c);
            [f0, f1, -k * f0, -k * f1]
        }
    };
    let span = if k > 0.0 { 2.0 * PI / w } else { 4.0 / w };
    let ok = |u: f64| {
        let d = f(u);
        d[0] > MIN_F && 1.0 - d[1] * d[1] > MIN_GDOT * MIN_GDOT
    };
    let u_range = admissible_interval((-span, span), 20_000, None, ok).ok_or_else(|| {
        Error::EmptyDomain(format!(
            "no u with f > 0 and |f'| < 1 for K={k}, alpha={alpha}, beta={beta}"
        ))
    })?;
    let u_ref = 0.5 * (u_range.0 + u_range.1);
    let profile = Profile::new(f, u_range, u_ref, 0.0)?;
    Ok(MeridianSpec::new(
        profile,
        SphereCurvature::Constant(1.0),
        Family::ConstantGauss { k, alpha, beta },
    ))
}

/// `y(t)` of a first-order profile equation `ḟ = y(f)`, in jet arithmetic so
/// that `y'` and `y''` come for free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateLaw {
    /// `y = √(1 - q²)`, `q = (C + t S/2 - b²/(4a) ln|2at + S|)/t`,
    /// `S = √(4a²t² - b²)`.
    Cmc { a: f64, b: f64, c: f64 },
    /// `y = √(1 - q²)`, `q = C ± (a/b) t²/2`; `branch` is `±1`.
    ConstantK { a: f64, b: f64, c: f64, branch: f64 },
}

impl RateLaw {
    fn s_squared(&self, t: f64) -> f64 {
        match *self {
            RateLaw::Cmc { a, b, .. } => 4.0 * a * a * t * t - b * b,
            RateLaw::ConstantK { .. } => 1.0,
        }
    }

    /// `q(t)` as a jet in the first variable.
    pub fn q(&self, t: Jet) -> Jet {
        match *self {
            RateLaw::Cmc { a, b, c } => {
                let s = (t * t * (4.0 * a * a) - b * b).sqrt();
                let log = (t * (2.0 * a) + s).ln_abs();
                (t * s * 0.5 - log * (b * b / (4.0 * a)) + c) / t
            }
            RateLaw::ConstantK { a, b, c, branch } => t * t * (branch * a / (2.0 * b)) + c,
        }
    }

    pub fn y(&self, t: Jet) -> Jet {
        let q = self.q(t);
        (1.0 - q * q).sqrt()
    }

    pub fn y_value(&self, t: f64) -> f64 {
        self.y(Jet::constant(t, 0)).value()
    }

    /// Admissible value: `f ≥ MIN_F`, real radicands with margin and
    /// `ġ = |q| ≥ MIN_GDOT`, `y ≥ MIN_GDOT`.
    fn admissible(&self, t: f64) -> bool {
        if !(t > MIN_F) {
            return false;
        }
        if let RateLaw::Cmc { b, .. } = *self {
            if self.s_squared(t) < 1e-2 * b * b {
                return false;
            }
        }
        let q = self.q(Jet::constant(t, 0)).value();
        q.is_finite() && q.abs() >= MIN_GDOT && 1.0 - q * q >= MIN_GDOT * MIN_GDOT
    }

    /// `[f, ḟ, f̈, f⃛]` given the value `f = t`.
    pub fn derivatives_at(&self, t: f64) -> [f64; 4] {
        let y = self.y(Jet::var_u(t, 2));
        let (y0, y1, y2) = (y.value(), y.partial(1, 0), y.partial(2, 0));
        [t, y0, y1 * y0, y2 * y0 * y0 + y1 * y1 * y0]
    }

    /// Sign of `q` on the profile; fixes the square-root branch of the
    /// second-order equations.
    fn q_sign(&self, t: f64) -> f64 {
        self.q(Jet::constant(t, 0)).value().signum()
    }

    /// Right-hand side of the second-order meridian equation `f̈ = F(f, ḟ)`
    /// on the branch with `sign(q) = s`.
    pub fn second_order_rhs(&self, f: f64, fd: f64, s: f64) -> f64 {
        let w = (1.0 - fd * fd).max(0.0).sqrt();
        match *self {
            RateLaw::Cmc { .. } => (1.0 - fd * fd - s * w * self.s_squared(f).max(0.0).sqrt()) / f,
            RateLaw::ConstantK { a, b, branch, .. } => -s * branch * (a / b) * f * w,
        }
    }

    /// Residual of the closed form in the meridian equation at `f = t`:
    /// `(1 - ḟ² - f f̈)² - (1 - ḟ²)(4a²f² - b²)` for constant mean
    /// curvature, `f̈/√(1 - ḟ²) + sign(q) (±a/b) f` for constant `k`.
    pub fn ode_residual(&self, t: f64) -> f64 {
        let [_, f1, f2, _] = self.derivatives_at(t);
        match *self {
            RateLaw::Cmc { .. } => {
                let lhs = (1.0 - f1 * f1 - t * f2).powi(2);
                lhs - (1.0 - f1 * f1) * self.s_squared(t)
            }
            RateLaw::ConstantK { a, b, branch, .. } => {
                f2 / (1.0 - f1 * f1).sqrt() + self.q_sign(t) * branch * (a / b) * t
            }
        }
    }
}

/// Tabulated solution of `ḟ = y(f)`.
#[derive(Clone, Debug)]
pub struct OdeProfile {
    pub law: RateLaw,
    pub u0: f64,
    pub step: f64,
    pub values: Vec<f64>,
    /// Admissible `t`-interval found by the scan.
    pub t_range: (f64, f64),
}

fn rk4_scalar(law: &RateLaw, t: f64, h: f64) -> f64 {
    let k1 = law.y_value(t);
    let k2 = law.y_value(t + 0.5 * h * k1);
    let k3 = law.y_value(t + 0.5 * h * k2);
    let k4 = law.y_value(t + h * k3);
    t + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

impl OdeProfile {
    /// Integrate from `f(0) = seed` in both directions until `f` leaves the
    /// admissible interval (the events `y → 0`, `y → 1` and the radicand
    /// bounds all live at its ends).
    pub fn build(law: RateLaw, t_range: (f64, f64), seed: f64) -> Result<Self> {
        let inside = |t: f64| t >= t_range.0 && t <= t_range.1 && law.admissible(t);
        let march = |dir: f64| {
            let mut out = Vec::new();
            let mut t = seed;
            // the admissible t-interval is crossed in finite u because y ≥ MIN_GDOT
            let limit = ((t_range.1 - t_range.0) / (MIN_GDOT * TABLE_STEP)).ceil() as usize + 2;
            for _ in 0..limit {
                let next = rk4_scalar(&law, t, dir * TABLE_STEP);
                let mid = rk4_scalar(&law, t, 0.5 * dir * TABLE_STEP);
                if !(inside(next) && inside(mid)) {
                    break;
                }
                t = next;
                out.push(t);
            }
            out
        };
        let back = march(-1.0);
        let fwd = march(1.0);
        if back.len() + fwd.len() < 8 {
            return Err(Error::EmptyDomain(format!(
                "profile equation leaves the admissible interval immediately from f = {seed}"
            )));
        }
        let mut values: Vec<f64> = back.iter().rev().copied().collect();
        let u0 = -(back.len() as f64) * TABLE_STEP;
        values.push(seed);
        values.extend(fwd);
        Ok(OdeProfile {
            law,
            u0,
            step: TABLE_STEP,
            values,
            t_range,
        })
    }

    /// Parameter interval covered by the table, one step in from each end.
    pub fn u_range(&self) -> (f64, f64) {
        let n = self.values.len() - 1;
        (self.u0 + self.step, self.u0 + (n - 1) as f64 * self.step)
    }

    pub fn f(&self, u: f64) -> f64 {
        let last = (self.values.len() - 1) as f64;
        let i = ((u - self.u0) / self.step).round().clamp(0.0, last) as usize;
        let ui = self.u0 + i as f64 * self.step;
        rk4_scalar(&self.law, self.values[i], u - ui)
    }

    /// Largest difference between the table and a direct fourth-order
    /// integration of the second-order equation from the same initial data.
    pub fn second_order_deviation(&self) -> f64 {
        let i0 = ((0.0 - self.u0) / self.step).round() as usize;
        let s = self.law.q_sign(self.values[i0]);
        let rhs = |f: f64, fd: f64| self.law.second_order_rhs(f, fd, s);
        let run = |dir: f64, count: usize| {
            let h = dir * self.step;
            let (mut f, mut fd) = (self.values[i0], self.law.y_value(self.values[i0]));
            let mut worst: f64 = 0.0;
            for k in 1..=count {
                let (k1f, k1d) = (fd, rhs(f, fd));
                let (k2f, k2d) = (fd + 0.5 * h * k1d, rhs(f + 0.5 * h * k1f, fd + 0.5 * h * k1d));
                let (k3f, k3d) = (fd + 0.5 * h * k2d, rhs(f + 0.5 * h * k2f, fd + 0.5 * h * k2d));
                let (k4f, k4d) = (fd + h * k3d, rhs(f + h * k3f, fd + h * k3d));
                f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
                fd += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
                let idx = if dir > 0.0 { i0 + k } else { i0 - k };
                worst = worst.max((f - self.values[idx]).abs());
            }
            worst
        };
        run(1.0, self.values.len() - 1 - i0).max(run(-1.0, i0))
    }

    pub fn into_profile(self) -> Result<Profile> {
        let u_range = self.u_range();
        let table = Arc::new(self);
        let t = table.clone();
        Profile::new(move |u| t.law.derivatives_at(t.f(u)), u_range, 0.0, 0.0)
    }
}

fn ode_spec(law: RateLaw, b: f64, family: Family, seed: Option<f64>) -> Result<(MeridianSpec, OdeProfile)> {
    let (scan, description) = match law {
        RateLaw::Cmc { a, b, .. } => (
            (0.0, 4.0 * (1.0 + b.abs() / a.abs()).max(1.0 / a.abs())),
            "constant mean curvature",
        ),
        RateLaw::ConstantK { a, b, .. } => ((0.0, 2.0 * (4.0 * b.abs() / a.abs()).sqrt() + 2.0), "constant k"),
    };
    let t_range = admissible_interval(scan, 40_000, seed, |t| law.admissible(t))
        .ok_or_else(|| Error::EmptyDomain(format!("{description} profile: no admissible f values")))?;
    let seed = seed
        .filter(|s| *s >= t_range.0 && *s <= t_range.1)
        .unwrap_or(0.5 * (t_range.0 + t_range.1));
    let table = OdeProfile::build(law, t_range, seed)?;
    let profile = table.clone().into_profile()?;
    Ok((MeridianSpec::new(profile, SphereCurvature::Constant(b), family), table))
}

fn check_nonzero(name: &str, x: f64) -> Result<()> {
    if x == 0.0 || !x.is_finite() {
        Err(Error::InvalidArgument(format!("{name} must be finite and non-zero")))
    } else {
        Ok(())
    }
}

/// Constant mean curvature `‖H‖ = |a|` with `κ ≡ b`.
pub fn cmc_profile(a: f64, b: f64, c: f64) -> Result<MeridianSpec> {
    cmc_profile_detailed(a, b, c, None).map(|(spec, _)| spec)
}

/// As [`cmc_profile`], also returning the tabulated profile; `seed` picks
/// the admissible interval and the initial value `f(0)`.
pub fn cmc_profile_detailed(a: f64, b: f64, c: f64, seed: Option<f64>) -> Result<(MeridianSpec, OdeProfile)> {
    check_nonzero("a", a)?;
    check_nonzero("b", b)?;
    ode_spec(RateLaw::Cmc { a, b, c }, b, Family::Cmc { a, b, c }, seed)
}

/// Constant `k = -a²` with `κ ≡ b`, on the `+` branch of `C ± (a/b) t²/2`.
pub fn constant_k_profile(a: f64, b: f64, c: f64) -> Result<MeridianSpec> {
    constant_k_profile_detailed(a, b, c, 1.0, None).map(|(spec, _)| spec)
}

pub fn constant_k_profile_detailed(
    a: f64,
    b: f64,
    c: f64,
    branch: f64,
    seed: Option<f64>,
) -> Result<(MeridianSpec, OdeProfile)> {
    check_nonzero("a", a)?;
    check_nonzero("b", b)?;
    if branch.abs() != 1.0 {
        return Err(Error::InvalidArgument("branch must be +1 or -1".into()));
    }
    let law = RateLaw::ConstantK { a, b, c, branch };
    ode_spec(law, b, Family::ConstantK { a, b, c, branch }, seed)
}

/// `f = sin u` with `κ(v) = b0 + b1 sin v` on `v ∈ [0, 2π]`.
pub fn custom_sine_spec(b0: f64, b1: f64) -> MeridianSpec {
    MeridianSpec::new(
        Profile::sine(),
        SphereCurvature::variable(move |v| b0 + b1 * v.sin(), move |v| b1 * v.cos()),
        Family::Custom,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::invariant_record;
    use crate::surface::ParamPoint;

    #[test]
    fn great_circle_for_zero_curvature() {
        let curve = spherical_curve(&SphereCurvature::Constant(0.0), (0.0, 2.0), SphereFrame::standard()).unwrap();
        for v in [0.3, 1.0, 1.9] {
            let f = curve.frame_at(v);
            assert!((f.l - Vector3::new(v.cos(), v.sin(), 0.0)).amax() < 1e-12);
        }
    }

    #[test]
    fn unit_curvature_circle_closes() {
        let period = 2.0 * PI / 2f64.sqrt();
        let k = SphereCurvature::variable(|_| 1.0, |_| 0.0);
        let curve = spherical_curve(&k, (0.0, period + 0.1), SphereFrame::standard()).unwrap();
        let back = curve.frame_at(period);
        assert!((back.l - Vector3::x()).norm() < 1e-6);
        // radius of the orbit
        let center: Vector3<f64> = (0..100)
            .map(|i| curve.frame_at(period * i as f64 / 100.0).l)
            .sum::<Vector3<f64>>()
            / 100.0;
        let r = (curve.frame_at(0.7).l - center).norm();
        assert!((r - 1.0 / 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn variable_curvature_keeps_frame_orthonormal() {
        let k = SphereCurvature::variable(f64::sin, f64::cos);
        let curve = spherical_curve(&k, (0.0, 10.0), SphereFrame::standard()).unwrap();
        assert!(curve.max_gram_defect() < 1e-9);
    }

    #[test]
    fn rejects_bad_initial_triple() {
        let bad = SphereFrame {
            l: Vector3::x(),
            t: Vector3::new(1.0, 1.0, 0.0),
            n: Vector3::z(),
        };
        assert!(matches!(
            spherical_curve(&SphereCurvature::Constant(1.0), (0.0, 1.0), bad),
            Err(Error::BadInitialFrame(_))
        ));
    }

    #[test]
    fn closed_circle_matches_integration() {
        let b = 0.7;
        let curve = spherical_curve(&SphereCurvature::Constant(b), (0.0, 3.0), circle_frame(b, 0.0)).unwrap();
        for v in [0.5, 2.9] {
            let (x, y) = (curve.frame_at(v), circle_frame(b, v));
            assert!((x.l - y.l).amax() < 1e-10 && (x.n - y.n).amax() < 1e-10);
        }
    }

    fn measured(spec: &MeridianSpec, u: f64, v: f64) -> crate::invariants::InvariantRecord {
        let m = meridian_surface(spec).unwrap();
        invariant_record(&m.evaluate_jet(ParamPoint::new(u, v), 2).unwrap()).unwrap()
    }

    #[test]
    fn sine_meridian_invariants() {
        let spec = MeridianSpec::sine(1.3);
        for (u, v) in [(0.6, 0.2), (1.4, 2.0), (2.5, 4.0)] {
            let r = measured(&spec, u, v);
            let exact = -1.3f64.powi(2) / u.sin().powi(2);
            assert!((r.k - exact).abs() < 1e-10 * exact.abs(), "{} vs {exact}", r.k);
            assert!(r.kappa.abs() < 1e-12);
            assert!((r.gauss_k - 1.0).abs() < 1e-10);
            assert!(r.second.l.abs() < 1e-12 && r.second.n.abs() < 1e-12);
            let cf = closed_form_invariants(&spec, u, v);
            assert!((r.second.m - cf.m).abs() < 1e-10, "{} vs {}", r.second.m, cf.m);
            assert!((r.h_norm - cf.h_norm).abs() < 1e-10);
        }
    }

    #[test]
    fn mean_curvature_vector_decomposes_in_module_frame() {
        let spec = custom_sine_spec(0.8, 0.3);
        let (u, v) = (1.1, 2.4);
        let m = meridian_surface(&spec).unwrap();
        let j = m.evaluate_jet(ParamPoint::new(u, v), 2).unwrap();
        let r = invariant_record(&j).unwrap();
        let [x, y, n1, n2] = meridian_frame(&spec, u, v).unwrap();
        assert!((x - j.z_u).amax() < 1e-12);
        assert!((y * u.sin() - j.z_v).amax() < 1e-9);
        let h = Vec4::from(r.h);
        let cf = closed_form_invariants(&spec, u, v);
        assert!((h.dot(&n1) - cf.h_n1).abs() < 1e-9);
        assert!((h.dot(&n2) - cf.h_n2).abs() < 1e-9);
        assert!(crate::surface::det4(&x, &y, &n1, &n2) > 0.0);
    }

    #[test]
    fn meridian_classes() {
        assert_eq!(classify(&MeridianSpec::sine(0.0), 50), MeridianClass::GreatCircle);
        assert_eq!(classify(&MeridianSpec::sine(1.0), 50), MeridianClass::General);
        let line = Profile::new(|u| [0.6 * u + 1.0, 0.6, 0.0, 0.0], (0.0, 2.0), 0.0, 0.0).unwrap();
        let spec = MeridianSpec::new(line, SphereCurvature::Constant(0.9), Family::Custom);
        assert_eq!(classify(&spec, 50), MeridianClass::StraightMeridian);
        let r = measured(&spec, 1.0, 0.5);
        assert!(r.k.abs() < 1e-12 && r.kappa.abs() < 1e-12 && r.gauss_k.abs() < 1e-12);

        let great = MeridianSpec::sine(0.0);
        let r = measured(&great, 1.0, 0.5);
        assert!(r.k.abs() < 1e-12);
    }

    #[test]
    fn constant_gauss_profiles() {
        assert!(constant_k_gauss_profile(0.0, 1.0, 0.0).is_err());
        for (k, alpha, beta) in [(1.0, 0.0, 1.0), (-1.0, 1.0, 0.0), (4.0, 0.3, 0.5)] {
            let spec = constant_k_gauss_profile(k, alpha, beta).unwrap();
            let (u0, u1) = spec.u_range;
            for i in 0..5 {
                let u = u0 + (u1 - u0) * (0.05 + 0.9 * i as f64 / 4.0);
                let r = measured(&spec, u, 0.3);
                assert!((r.gauss_k - k).abs() < 1e-6, "K={k} at u={u}: {}", r.gauss_k);
            }
        }
    }

    #[test]
    fn cmc_closed_form_satisfies_equation() {
        let (spec, table) = cmc_profile_detailed(1.0, 0.5, 0.0, None).unwrap();
        let (t0, t1) = table.t_range;
        for i in 0..=50 {
            let t = t0 + (t1 - t0) * i as f64 / 50.0;
            assert!(table.law.ode_residual(t).abs() < 1e-8, "t={t}");
        }
        assert!(table.second_order_deviation() < 1e-6);
        let (u0, u1) = spec.u_range;
        for i in 0..5 {
            let u = u0 + (u1 - u0) * (0.05 + 0.9 * i as f64 / 4.0);
            let r = measured(&spec, u, 1.0);
            assert!((r.h_norm - 1.0).abs() < 1e-5, "{}", r.h_norm);
            assert!(r.kappa.abs() < 1e-9);
        }
    }

    #[test]
    fn constant_k_both_branches() {
        for (branch, c) in [(1.0, 0.2), (-1.0, 0.8)] {
            let (spec, table) = constant_k_profile_detailed(1.0, 1.0, c, branch, None).unwrap();
            let (t0, t1) = table.t_range;
            for i in 0..=50 {
                let t = t0 + (t1 - t0) * i as f64 / 50.0;
                assert!(table.law.ode_residual(t).abs() < 1e-8);
            }
            assert!(table.second_order_deviation() < 1e-6);
            let (u0, u1) = spec.u_range;
            for i in 0..5 {
                let u = u0 + (u1 - u0) * (0.05 + 0.9 * i as f64 / 4.0);
                let r = measured(&spec, u, 0.4);
                assert!((r.k + 1.0).abs() < 1e-5, "branch {branch}: k = {}", r.k);
            }
        }
    }

    #[test]
    fn empty_domains_are_reported() {
        // |q| = |C + t²/2| > 1 for every t > 0
        assert!(matches!(constant_k_profile(1.0, 1.0, 3.0), Err(Error::EmptyDomain(_))));
        assert!(cmc_profile(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn profile_keeps_unit_speed() {
        let spec = constant_k_gauss_profile(-1.0, 1.0, 0.0).unwrap();
        let u = 0.3;
        let f = spec.profile.f_derivatives(u);
        let g = spec.profile.g_derivatives(u);
        assert!((f[1] * f[1] + g[1] * g[1] - 1.0).abs() < 1e-14);
        // g by quadrature matches the closed antiderivative of √(1 - sinh²)
        let h = 1e-5;
        let fd = (spec.profile.g_derivatives(u + h)[0] - spec.profile.g_derivatives(u - h)[0]) / (2.0 * h);
        assert!((fd - g[1]).abs() < 1e-9);
    }
}
