//! C interface to `surf4`.
//!
//! Objects live behind opaque handles created by `*_new`/`*_build`/`*_load`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a `Surf4Status`; on failure the thread's last error message is
//! available from `surf4_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use surf4::bonnet::{self, ReconstructOptions, ReconstructedPatch};
use surf4::net::InvariantFieldGrid;
use surf4::surface::{ParamPoint, SurfaceModel, Vec4};
use surf4::{catalog, frame, invariants, io, net, report, Error, ErrorCategory};

/// Status codes; the non-zero values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Surf4Status {
    Ok = 0,
    NullArgument = 1,
    Input = 2,
    Threshold = 3,
    Numerical = 4,
    Panic = 5,
}

pub struct Surf4Surface {
    model: SurfaceModel,
}

pub struct Surf4Grid {
    grid: InvariantFieldGrid,
}

pub struct Surf4Patch {
    patch: ReconstructedPatch,
}

/// Pointwise invariants; `point_class` is 0 flat, 1 elliptic, 2 parabolic,
/// 3 hyperbolic.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Surf4Invariants {
    pub k: f64,
    pub kappa: f64,
    pub gauss_k: f64,
    pub h_norm: f64,
    pub nu_prime: f64,
    pub nu_doubleprime: f64,
    pub point_class: i32,
}

/// The geometric frame `x, y, b, l` and its eight invariants.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Surf4Frame {
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
}

/// Summary of the compatibility equations on a grid.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Surf4CheckSummary {
    pub max_residual: f64,
    /// Index of the worst equation, 0..6.
    pub worst_equation: u32,
    pub worst_i: usize,
    pub worst_j: usize,
    pub general_class: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> Surf4Status {
    let status = match e.category() {
        ErrorCategory::Input => Surf4Status::Input,
        ErrorCategory::Threshold => Surf4Status::Threshold,
        ErrorCategory::Numerical => Surf4Status::Numerical,
    };
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> Surf4Status {
    set_last_error(format!("null pointer passed for `{what}`"));
    Surf4Status::NullArgument
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Surf4Status>) -> Surf4Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Surf4Status::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            Surf4Status::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Surf4Status> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Surf4Status> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Surf4Status> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(Error::InvalidArgument(format!("`{what}` is not valid UTF-8"))))
}

unsafe fn as_slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Surf4Status> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn as_slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Surf4Status> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn array(w: &Vec4) -> [f64; 4] {
    [w[0], w[1], w[2], w[3]]
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn surf4_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn surf4_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a catalog surface.
///
/// # Safety
/// `name` must be a NUL-terminated string, `params` must point to
/// `nparams` doubles (or be NULL when `nparams` is 0) and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_surface_new(
    name: *const c_char,
    params: *const f64,
    nparams: usize,
    out: *mut *mut Surf4Surface,
) -> Surf4Status {
    guard(|| {
        let out = as_mut(out, "out")?;
        let name = as_str(name, "name")?;
        let params = as_slice(params, nparams, "params")?;
        let model = catalog::catalog(name, params).map_err(fail)?;
        *out = Box::into_raw(Box::new(Surf4Surface { model }));
        Ok(())
    })
}

/// Load a sampled surface from a patch file (or a grid file with positions).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_surface_load(path: *const c_char, out: *mut *mut Surf4Surface) -> Surf4Status {
    guard(|| {
        let out = as_mut(out, "out")?;
        let path = as_str(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.into()))?;
        let patch = match io::file_kind(&text).map_err(fail)? {
            io::FileKind::Patch => io::parse_csv4d(&text).map_err(fail)?,
            io::FileKind::Grid => io::SampledPatch::from_grid(&io::parse_grid(&text).map_err(fail)?)
                .ok_or_else(|| fail(Error::InvalidArgument("grid carries no positions".into())))?,
        };
        let model = io::sampled_surface(&patch, path).map_err(fail)?;
        *out = Box::into_raw(Box::new(Surf4Surface { model }));
        Ok(())
    })
}

/// # Safety
/// `surface` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn surf4_surface_free(surface: *mut Surf4Surface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Pointwise invariants at `(u, v)` from a jet of the given order (2 or 3).
///
/// # Safety
/// `surface` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_point_invariants(
    surface: *const Surf4Surface,
    u: f64,
    v: f64,
    order: u8,
    out: *mut Surf4Invariants,
) -> Surf4Status {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let out = as_mut(out, "out")?;
        let jet = s.model.evaluate_jet(ParamPoint::new(u, v), order).map_err(fail)?;
        let r = invariants::invariant_record(&jet).map_err(fail)?;
        *out = Surf4Invariants {
            k: r.k,
            kappa: r.kappa,
            gauss_k: r.gauss_k,
            h_norm: r.h_norm,
            nu_prime: r.nu_prime,
            nu_doubleprime: r.nu_doubleprime,
            point_class: match r.point_class {
                invariants::PointClass::Flat => 0,
                invariants::PointClass::Elliptic => 1,
                invariants::PointClass::Parabolic => 2,
                invariants::PointClass::Hyperbolic => 3,
            },
        };
        Ok(())
    })
}

/// Geometric frame at `(u, v)`; fails at minimal and flat points.
///
/// # Safety
/// `surface` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_geometric_frame(
    surface: *const Surf4Surface,
    u: f64,
    v: f64,
    out: *mut Surf4Frame,
) -> Surf4Status {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let out = as_mut(out, "out")?;
        let f = frame::geometric_frame(&s.model, ParamPoint::new(u, v)).map_err(fail)?;
        *out = Surf4Frame {
            x: f.x,
            y: f.y,
            b: f.b,
            l: f.l,
            gamma1: f.gamma1,
            gamma2: f.gamma2,
            nu1: f.nu1,
            nu2: f.nu2,
            lambda: f.lambda,
            mu: f.mu,
            beta1: f.beta1,
            beta2: f.beta2,
        };
        Ok(())
    })
}

/// Build a curvature-line net with node (0, 0) at `(seed_u, seed_v)`.
///
/// # Safety
/// `surface` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_net_build(
    surface: *const Surf4Surface,
    seed_u: f64,
    seed_v: f64,
    nu: usize,
    nv: usize,
    du: f64,
    dv: f64,
    out: *mut *mut Surf4Grid,
) -> Surf4Status {
    guard(|| {
        let s = as_ref(surface, "surface")?;
        let out = as_mut(out, "out")?;
        let grid = net::build_net(&s.model, ParamPoint::new(seed_u, seed_v), nu, nv, du, dv).map_err(fail)?;
        *out = Box::into_raw(Box::new(Surf4Grid { grid }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_load(path: *const c_char, out: *mut *mut Surf4Grid) -> Surf4Status {
    guard(|| {
        let out = as_mut(out, "out")?;
        let grid = io::load_grid(Path::new(as_str(path, "path")?)).map_err(fail)?;
        *out = Box::into_raw(Box::new(Surf4Grid { grid }));
        Ok(())
    })
}

/// # Safety
/// `grid` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_save(grid: *const Surf4Grid, path: *const c_char) -> Surf4Status {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        io::save_grid(&g.grid, Path::new(as_str(path, "path")?)).map_err(fail)
    })
}

/// # Safety
/// `grid` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_free(grid: *mut Surf4Grid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// # Safety
/// `grid` must be a live handle; `nu` and `nv` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_dims(grid: *const Surf4Grid, nu: *mut usize, nv: *mut usize) -> Surf4Status {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        *as_mut(nu, "nu")? = g.grid.nu;
        *as_mut(nv, "nv")? = g.grid.nv;
        Ok(())
    })
}

/// Copy field `field` (0 sqrtE, 1 sqrtG, 2 gamma1, 3 gamma2, 4 nu1, 5 nu2,
/// 6 lambda, 7 mu, 8 beta1, 9 beta2) into `buf`, node `(i, j)` at
/// `i * nv + j`. `len` must be at least `nu * nv`.
///
/// # Safety
/// `grid` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_field(
    grid: *const Surf4Grid,
    field: u32,
    buf: *mut f64,
    len: usize,
) -> Surf4Status {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let values = g
            .grid
            .fields
            .get(field as usize)
            .ok_or_else(|| fail(Error::InvalidArgument(format!("no field {field}"))))?;
        if len < values.len() {
            return Err(fail(Error::InvalidArgument(format!(
                "buffer holds {len}, need {}",
                values.len()
            ))));
        }
        as_slice_mut(buf, len, "buf")?[..values.len()].copy_from_slice(values);
        Ok(())
    })
}

/// Overwrite field `field` from `values` (`nu * nv` doubles).
///
/// # Safety
/// `grid` must be a live handle and `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_set_field(
    grid: *mut Surf4Grid,
    field: u32,
    values: *const f64,
    len: usize,
) -> Surf4Status {
    guard(|| {
        let g = as_mut(grid, "grid")?;
        let n = g.grid.len();
        if len != n {
            return Err(fail(Error::InvalidArgument(format!("expected {n} values, got {len}"))));
        }
        let src = as_slice(values, len, "values")?;
        let dst = g
            .grid
            .fields
            .get_mut(field as usize)
            .ok_or_else(|| fail(Error::InvalidArgument(format!("no field {field}"))))?;
        dst.copy_from_slice(src);
        Ok(())
    })
}

/// Evaluate the compatibility equations.
///
/// # Safety
/// `grid` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_grid_check(grid: *const Surf4Grid, out: *mut Surf4CheckSummary) -> Surf4Status {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let out = as_mut(out, "out")?;
        let r = net::check_integrability(&g.grid);
        let (e, (i, j), max) = r.worst();
        *out = Surf4CheckSummary {
            max_residual: max,
            worst_equation: e as u32,
            worst_i: i,
            worst_j: j,
            general_class: r.general_class,
        };
        Ok(())
    })
}

/// Integrate a patch from the grid, starting from the standard frame at the
/// origin. `threshold <= 0` disables the compatibility gate.
///
/// # Safety
/// `grid` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_reconstruct(
    grid: *const Surf4Grid,
    threshold: f64,
    out: *mut *mut Surf4Patch,
) -> Surf4Status {
    guard(|| {
        let g = as_ref(grid, "grid")?;
        let out = as_mut(out, "out")?;
        let options = ReconstructOptions {
            threshold: (threshold > 0.0).then_some(threshold),
            ..Default::default()
        };
        let frame = [Vec4::x(), Vec4::y(), Vec4::z(), Vec4::w()];
        let patch = bonnet::reconstruct_with(&g.grid, &frame, Vec4::zeros(), &options).map_err(fail)?;
        *out = Box::into_raw(Box::new(Surf4Patch { patch }));
        Ok(())
    })
}

/// # Safety
/// `patch` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn surf4_patch_free(patch: *mut Surf4Patch) {
    if !patch.is_null() {
        drop(Box::from_raw(patch));
    }
}

/// Number of nodes of a patch.
///
/// # Safety
/// `patch` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn surf4_patch_len(patch: *const Surf4Patch) -> usize {
    patch.as_ref().map_or(0, |p| p.patch.positions.len())
}

/// Largest deviation of a reconstructed frame from orthonormality.
///
/// # Safety
/// `patch` must be a live handle or NULL (which yields NaN).
#[no_mangle]
pub unsafe extern "C" fn surf4_patch_gram_drift(patch: *const Surf4Patch) -> f64 {
    patch.as_ref().map_or(f64::NAN, |p| p.patch.gram_drift)
}

/// Copy the positions, four doubles per node, into `buf` (`len >= 4 n`).
///
/// # Safety
/// `patch` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn surf4_patch_positions(patch: *const Surf4Patch, buf: *mut f64, len: usize) -> Surf4Status {
    guard(|| {
        let p = as_ref(patch, "patch")?;
        let need = 4 * p.patch.positions.len();
        if len < need {
            return Err(fail(Error::InvalidArgument(format!("buffer holds {len}, need {need}"))));
        }
        let dst = as_slice_mut(buf, len, "buf")?;
        for (k, x) in p.patch.positions.iter().enumerate() {
            dst[4 * k..4 * k + 4].copy_from_slice(&array(x));
        }
        Ok(())
    })
}

/// Proper rigid motion with `candidate ≈ R reference + t` for two sets of
/// `npoints` points stored as four doubles each. `rotation` receives 16
/// doubles in row-major order, `translation` 4.
///
/// # Safety
/// The point buffers must hold `4 * npoints` doubles, `rotation` 16,
/// `translation` 4, and `rms` must be writable.
#[no_mangle]
pub unsafe extern "C" fn surf4_rigid_align(
    candidate: *const f64,
    reference: *const f64,
    npoints: usize,
    rotation: *mut f64,
    translation: *mut f64,
    rms: *mut f64,
) -> Surf4Status {
    guard(|| {
        let points = |p: *const f64, what: &str| -> Result<Vec<Vec4>, Surf4Status> {
            Ok(as_slice(p, 4 * npoints, what)?
                .chunks_exact(4)
                .map(Vec4::from_column_slice)
                .collect())
        };
        let (c, r) = (points(candidate, "candidate")?, points(reference, "reference")?);
        let a = surf4::align::rigid_align(&c, &r).map_err(fail)?;
        let rot = as_slice_mut(rotation, 16, "rotation")?;
        for i in 0..4 {
            for j in 0..4 {
                rot[4 * i + j] = a.rotation[(i, j)];
            }
        }
        as_slice_mut(translation, 4, "translation")?.copy_from_slice(&array(&a.translation));
        *as_mut(rms, "rms")? = a.rms;
        Ok(())
    })
}

/// Name of compatibility equation `index` as a static string, or NULL.
#[no_mangle]
pub extern "C" fn surf4_equation_name(index: u32) -> *const c_char {
    const NAMES: [&str; 6] = [
        "sqrtE_v\0",
        "sqrtG_u\0",
        "gauss\0",
        "codazzi_b_1\0",
        "codazzi_b_2\0",
        "ricci\0",
    ];
    debug_assert!(NAMES
        .iter()
        .zip(report::EQUATION_NAMES)
        .all(|(a, b)| a.trim_end_matches('\0') == b));
    NAMES.get(index as usize).map_or(ptr::null(), |s| s.as_ptr().cast())
}
