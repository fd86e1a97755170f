//! C ABI for serrin-warp.
//!
//! Every fallible function returns an [`SwStatus`] and writes its result
//! through an out pointer. On failure the message is available from
//! [`sw_last_error`] on the same thread. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serrin_warp::catalog;
use serrin_warp::geodesics::distance_by_shooting;
use serrin_warp::geometry::WarpedManifold;
use serrin_warp::radial::{self, RadialProfile};
use serrin_warp::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Precondition = 4,
    Construction = 5,
    NoSolution = 6,
    InadmissibleRadius = 7,
    Singular = 8,
    DegenerateRecovery = 9,
    ChartOverflow = 10,
    Solver = 11,
    InsufficientResolution = 12,
    NotFound = 13,
    Config = 14,
    Io = 15,
    Panic = 99,
}

/// A warped product built from a catalog entry.
pub struct SwManifold {
    inner: WarpedManifold,
}

/// A solved radial profile.
pub struct SwRadialProfile {
    inner: RadialProfile,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SwStatus {
    match e {
        Error::Domain(_) => SwStatus::Domain,
        Error::Precondition(_) => SwStatus::Precondition,
        Error::Construction(_) => SwStatus::Construction,
        Error::NoSolution(_) => SwStatus::NoSolution,
        Error::InadmissibleRadius(_) => SwStatus::InadmissibleRadius,
        Error::Singular(_) => SwStatus::Singular,
        Error::DegenerateRecovery(_) => SwStatus::DegenerateRecovery,
        Error::ChartOverflow(_) => SwStatus::ChartOverflow,
        Error::Solver(_) => SwStatus::Solver,
        Error::InsufficientResolution(_) => SwStatus::InsufficientResolution,
        Error::NotFound(_) => SwStatus::NotFound,
        Error::Config(_) => SwStatus::Config,
        Error::Io(_) => SwStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SwStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            SwStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(&msg);
            SwStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            SwStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the catalog entry `entry` (e.g. `space_form:k=-1`) in dimension `n`.
///
/// # Safety
/// `entry` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_manifold_new(entry: *const c_char, n: usize, out: *mut *mut SwManifold) -> SwStatus {
    guard(|| {
        if entry.is_null() {
            return Err(Fail::Null("entry"));
        }
        let text = CStr::from_ptr(entry).to_str().map_err(|_| Fail::Arg("entry is not UTF-8".into()))?;
        let e = catalog::entry(text, n)?;
        write(out, Box::into_raw(Box::new(SwManifold { inner: e.manifold })), "out")
    })
}

/// # Safety
/// `m` must come from [`sw_manifold_new`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_manifold_free(m: *mut SwManifold) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Curvature constant the entry is built around.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_manifold_curvature_constant(m: *const SwManifold, out: *mut f64) -> SwStatus {
    guard(|| write(out, deref(m, "manifold")?.inner.k, "out"))
}

/// Minimum over `samples` radii of `Ric − (n−1)k` on unit vectors; the bound
/// holds when the margin is nonnegative.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_check_ricci_bound(m: *const SwManifold, k: f64, samples: usize, margin: *mut f64) -> SwStatus {
    guard(|| {
        let m = deref(m, "manifold")?;
        write(margin, m.inner.check_ricci_bound(k, samples)?, "margin")
    })
}

/// `kσ′ + Δσ′/n` at radius `r`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_serrin_coefficient(m: *const SwManifold, k: f64, r: f64, out: *mut f64) -> SwStatus {
    guard(|| {
        let m = deref(m, "manifold")?;
        write(out, m.inner.serrin_coefficient(k, r)?.0, "out")
    })
}

/// Solves the radial torsion problem on the ball of `radius` about the pole.
///
/// # Safety
/// Pointers must be valid; release the profile with [`sw_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn sw_solve_radial(
    m: *const SwManifold,
    k: f64,
    radius: f64,
    step: f64,
    out: *mut *mut SwRadialProfile,
) -> SwStatus {
    guard(|| {
        let m = deref(m, "manifold")?;
        let p = radial::solve_radial_bvp(&m.inner, k, radius, step)?;
        write(out, Box::into_raw(Box::new(SwRadialProfile { inner: p })), "out")
    })
}

/// # Safety
/// `p` must come from [`sw_solve_radial`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sw_profile_free(p: *mut SwRadialProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `p` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn sw_profile_len(p: *const SwRadialProfile) -> usize {
    p.as_ref().map_or(0, |p| p.inner.len())
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_profile_center_value(p: *const SwRadialProfile, out: *mut f64) -> SwStatus {
    guard(|| write(out, deref(p, "profile")?.inner.center_value(), "out"))
}

/// `|u′|` on the boundary sphere.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_profile_boundary_gradient(p: *const SwRadialProfile, out: *mut f64) -> SwStatus {
    guard(|| write(out, deref(p, "profile")?.inner.boundary_gradient_c, "out"))
}

/// Node `index` as `(r, u, u′)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_profile_node(
    p: *const SwRadialProfile,
    index: usize,
    r: *mut f64,
    u: *mut f64,
    du: *mut f64,
) -> SwStatus {
    guard(|| {
        let p = &deref(p, "profile")?.inner;
        if index >= p.len() {
            return Err(Fail::Arg(format!("index {index} out of range for {} nodes", p.len())));
        }
        write(r, p.r[index], "r")?;
        write(u, p.u[index], "u")?;
        write(du, p.du[index], "du")
    })
}

/// Closed-form solution on a geodesic ball of a space form of curvature `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sw_closed_form_solution(k: f64, n: usize, ball_radius: f64, r: f64, out: *mut f64) -> SwStatus {
    guard(|| write(out, radial::closed_form_solution(k, n, ball_radius, r)?, "out"))
}

/// Riemannian distance between `(r1, θ1)` and `(r2, θ2)` by geodesic shooting.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sw_geodesic_distance(
    m: *const SwManifold,
    r1: f64,
    theta1: f64,
    r2: f64,
    theta2: f64,
    tol: f64,
    out: *mut f64,
) -> SwStatus {
    guard(|| {
        let m = deref(m, "manifold")?;
        write(out, distance_by_shooting(&m.inner, (r1, theta1), (r2, theta2), tol)?, "out")
    })
}
