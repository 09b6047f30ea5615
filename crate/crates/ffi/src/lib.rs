//! C ABI over `patchbif`.
//!
//! Objects cross the boundary as opaque pointers that the caller releases
//! with the matching `pb_*_free`. Every fallible call returns a `PbStatus`;
//! on failure `pb_last_error_message` describes the most recent error on
//! the calling thread. Panics are caught and reported as `PB_INTERNAL`.
//! Strings returned by the library are freed with `pb_string_free`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use patchbif::solver::{continue_branch, verify_solution, Branch, ContinuationConfig, Problem, VerifyTolerances};
use patchbif::spectral::{three_layer_bifurcation, two_layer_bifurcation, two_layer_bifurcation_at, BifurcationPoint, Root};
use patchbif::Error;

/// Status codes. Zero is success; the rest mirror the library's error codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbStatus {
    PB_OK = 0,
    PB_NULL_POINTER = 1,
    PB_INVALID_ARGUMENT = 2,
    PB_INTERNAL = 3,
    PB_NESTING_VIOLATION = 10,
    PB_QUADRATURE_UNDERRESOLVED = 11,
    PB_NEGATIVE_RADICAND = 12,
    PB_NOT_NESTED = 13,
    PB_POINT_ON_BOUNDARY = 14,
    PB_DOMAIN = 15,
    PB_B_TOO_LARGE = 16,
    PB_NOT_A_ROOT = 17,
    PB_PARAM_WINDOW = 18,
    PB_NO_ROOT = 19,
    PB_DEGENERATE = 20,
    PB_NO_CONVERGENCE = 21,
    PB_SINGULAR_JACOBIAN = 22,
    PB_T_S_SINGULAR = 23,
    PB_ZERO_MEAN_NO_BIFURCATION = 24,
    PB_IO = 25,
    PB_CONFIG = 26,
}

/// Two-layer root selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PbRoot {
    PB_ROOT_MINUS = 0,
    PB_ROOT_PLUS = 1,
}

/// A certified bifurcation point.
pub struct PbPoint {
    inner: BifurcationPoint,
}

/// A computed branch together with the settings that produced it.
pub struct PbBranch {
    inner: Branch,
    point: BifurcationPoint,
    config: ContinuationConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PbStatus {
    use PbStatus::*;
    match e {
        Error::NestingViolation { .. } => PB_NESTING_VIOLATION,
        Error::QuadratureUnderresolved(_) => PB_QUADRATURE_UNDERRESOLVED,
        Error::NegativeRadicand(_) => PB_NEGATIVE_RADICAND,
        Error::NotNested { .. } => PB_NOT_NESTED,
        Error::PointOnBoundary { .. } => PB_POINT_ON_BOUNDARY,
        Error::Domain(_) => PB_DOMAIN,
        Error::BTooLarge { .. } => PB_B_TOO_LARGE,
        Error::NotARoot { .. } => PB_NOT_A_ROOT,
        Error::ParamWindow(_) => PB_PARAM_WINDOW,
        Error::NoRoot(_) => PB_NO_ROOT,
        Error::Degenerate(_) => PB_DEGENERATE,
        Error::NoConvergence { .. } => PB_NO_CONVERGENCE,
        Error::SingularJacobian { .. } => PB_SINGULAR_JACOBIAN,
        Error::TsSingular { .. } => PB_T_S_SINGULAR,
        Error::ZeroMeanNoBifurcation { .. } => PB_ZERO_MEAN_NO_BIFURCATION,
        Error::Io(_) => PB_IO,
        Error::Config(_) => PB_CONFIG,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the
/// thread-local message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PbStatus::PB_OK
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(format!("{}: {e}", e.code()));
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            PbStatus::PB_NULL_POINTER
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            PbStatus::PB_INVALID_ARGUMENT
        }
        Err(_) => {
            set_error("internal error (panic)".into());
            PbStatus::PB_INTERNAL
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { out.write(value) };
    Ok(())
}

fn to_c_string(text: String) -> *mut c_char {
    CString::new(text).map_or(ptr::null_mut(), CString::into_raw)
}

fn json_err(e: serde_json::Error) -> Fail {
    Fail::Arg(e.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Certifies the two-layer point at the selected root of the dispersion
/// polynomial.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pb_two_layer_bifurcation(
    b: f64,
    m: usize,
    root: PbRoot,
    n_max: usize,
    out: *mut *mut PbPoint,
) -> PbStatus {
    guard(|| {
        let root = match root {
            PbRoot::PB_ROOT_MINUS => Root::Minus,
            PbRoot::PB_ROOT_PLUS => Root::Plus,
        };
        let p = two_layer_bifurcation(b, m, root, n_max)?;
        unsafe { put(out, Box::into_raw(Box::new(PbPoint { inner: p })), "out") }
    })
}

/// Certifies the two-layer point at an explicit `theta`, which must be a
/// root. `theta = b²` is refused with `PB_ZERO_MEAN_NO_BIFURCATION`.
///
/// # Safety
/// As [`pb_two_layer_bifurcation`].
#[no_mangle]
pub unsafe extern "C" fn pb_two_layer_bifurcation_at(
    b: f64,
    m: usize,
    theta: f64,
    n_max: usize,
    out: *mut *mut PbPoint,
) -> PbStatus {
    guard(|| {
        let p = two_layer_bifurcation_at(b, m, theta, n_max)?;
        unsafe { put(out, Box::into_raw(Box::new(PbPoint { inner: p })), "out") }
    })
}

/// Certifies the zero-circulation three-layer point for `(b2, theta2)`.
///
/// # Safety
/// As [`pb_two_layer_bifurcation`].
#[no_mangle]
pub unsafe extern "C" fn pb_three_layer_bifurcation(
    b2: f64,
    theta2: f64,
    m: usize,
    n_max: usize,
    out: *mut *mut PbPoint,
) -> PbStatus {
    guard(|| {
        let p = three_layer_bifurcation(b2, theta2, m, n_max)?;
        unsafe { put(out, Box::into_raw(Box::new(PbPoint { inner: p })), "out") }
    })
}

/// # Safety
/// `p` must be NULL or a point from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_point_free(p: *mut PbPoint) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Bifurcation value `Θ*`.
///
/// # Safety
/// `p` must be a live point and `theta` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_point_theta(p: *const PbPoint, theta: *mut f64) -> PbStatus {
    guard(|| {
        let p = unsafe { get(p, "point") }?;
        unsafe { put(theta, p.inner.theta, "theta") }
    })
}

/// Number of layers, and their radii and vorticities (outermost first)
/// written to `radii` and `thetas` when those are non-NULL. Each buffer must
/// hold at least `*n_layers` values; call once with NULL buffers to query
/// the count.
///
/// # Safety
/// `p` must be a live point, `n_layers` writable, buffers NULL or large enough.
#[no_mangle]
pub unsafe extern "C" fn pb_point_layers(
    p: *const PbPoint,
    n_layers: *mut usize,
    radii: *mut f64,
    thetas: *mut f64,
) -> PbStatus {
    guard(|| {
        let p = unsafe { get(p, "point") }?;
        let layers = &p.inner.layers;
        for (i, l) in layers.iter().enumerate() {
            if !radii.is_null() {
                unsafe { radii.add(i).write(l.radius) };
            }
            if !thetas.is_null() {
                unsafe { thetas.add(i).write(l.strength) };
            }
        }
        unsafe { put(n_layers, layers.len(), "n_layers") }
    })
}

/// Transversality coefficient and the smallest higher-mode determinant.
///
/// # Safety
/// `p` must be a live point; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn pb_point_certificate(
    p: *const PbPoint,
    transversality: *mut f64,
    higher_mode_margin: *mut f64,
) -> PbStatus {
    guard(|| {
        let p = unsafe { get(p, "point") }?;
        unsafe { put(transversality, p.inner.transversality, "transversality") }?;
        unsafe { put(higher_mode_margin, p.inner.higher_mode_margin, "higher_mode_margin") }
    })
}

/// Full certificate as JSON. Free with [`pb_string_free`].
///
/// # Safety
/// `p` must be a live point and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_point_to_json(p: *const PbPoint, out: *mut *mut c_char) -> PbStatus {
    guard(|| {
        let p = unsafe { get(p, "point") }?;
        let text = serde_json::to_string_pretty(&p.inner).map_err(json_err)?;
        unsafe { put(out, to_c_string(text), "out") }
    })
}

/// Continues the branch from `p`. `config_json` is NULL for defaults or a
/// JSON object with any subset of the continuation settings.
///
/// # Safety
/// `p` live, `config_json` NULL or a NUL-terminated UTF-8 string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_continue(
    p: *const PbPoint,
    config_json: *const c_char,
    out: *mut *mut PbBranch,
) -> PbStatus {
    guard(|| {
        let p = unsafe { get(p, "point") }?;
        let config = if config_json.is_null() {
            ContinuationConfig::default()
        } else {
            let text = unsafe { CStr::from_ptr(config_json) }
                .to_str()
                .map_err(|e| Fail::Arg(format!("config is not UTF-8: {e}")))?;
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        let inner = continue_branch(&p.inner, &config)?;
        let b = PbBranch {
            inner,
            point: p.inner.clone(),
            config,
        };
        unsafe { put(out, Box::into_raw(Box::new(b)), "out") }
    })
}

/// # Safety
/// `b` must be NULL or a branch from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_free(b: *mut PbBranch) {
    if !b.is_null() {
        drop(unsafe { Box::from_raw(b) });
    }
}

/// Number of converged states.
///
/// # Safety
/// `b` live, `len` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_len(b: *const PbBranch, len: *mut usize) -> PbStatus {
    guard(|| {
        let b = unsafe { get(b, "branch") }?;
        unsafe { put(len, b.inner.states.len(), "len") }
    })
}

/// Amplitude, `Θ` and residual of state `index`. NULL outputs are skipped.
///
/// # Safety
/// `b` live; outputs NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_state(
    b: *const PbBranch,
    index: usize,
    amplitude: *mut f64,
    theta: *mut f64,
    residual: *mut f64,
) -> PbStatus {
    guard(|| {
        let b = unsafe { get(b, "branch") }?;
        let st = b.inner.states.get(index).ok_or_else(|| {
            Fail::Arg(format!("state {index} out of range ({} states)", b.inner.states.len()))
        })?;
        for (ptr, v) in [(amplitude, st.amplitude), (theta, st.theta), (residual, st.residual)] {
            if !ptr.is_null() {
                unsafe { ptr.write(v) };
            }
        }
        Ok(())
    })
}

/// Cosine coefficients of layer `layer` in state `index`. Writes up to
/// `cap` values to `coeffs` and the total count to `len`.
///
/// # Safety
/// `b` live; `coeffs` NULL or holding `cap` values; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_coefficients(
    b: *const PbBranch,
    index: usize,
    layer: usize,
    coeffs: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PbStatus {
    guard(|| {
        let b = unsafe { get(b, "branch") }?;
        let st = b
            .inner
            .states
            .get(index)
            .ok_or_else(|| Fail::Arg(format!("state {index} out of range")))?;
        let series = st
            .perturbations
            .get(layer)
            .ok_or_else(|| Fail::Arg(format!("layer {layer} out of range")))?;
        let c = series.coeffs();
        if !coeffs.is_null() {
            for (i, v) in c.iter().take(cap).enumerate() {
                unsafe { coeffs.add(i).write(*v) };
            }
        }
        unsafe { put(len, c.len(), "len") }
    })
}

/// Re-verifies every state with `strict`-times the quadrature. `pass` is
/// set to 1 when all states pass, else 0.
///
/// # Safety
/// `b` live, `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_verify(b: *const PbBranch, strict: usize, pass: *mut i32) -> PbStatus {
    guard(|| {
        let b = unsafe { get(b, "branch") }?;
        let problem = Problem::new(&b.point, b.config.truncation, b.config.quadrature)?;
        let tol = VerifyTolerances::for_newton_tol(b.config.newton_tol);
        let mut ok = true;
        for st in &b.inner.states {
            ok &= verify_solution(st, &problem, strict, &tol)?.pass;
        }
        unsafe { put(pass, i32::from(ok), "pass") }
    })
}

/// States, stop reason and events as JSON. Free with [`pb_string_free`].
///
/// # Safety
/// `b` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_branch_to_json(b: *const PbBranch, out: *mut *mut c_char) -> PbStatus {
    guard(|| {
        let b = unsafe { get(b, "branch") }?;
        let text = serde_json::to_string_pretty(&b.inner).map_err(json_err)?;
        unsafe { put(out, to_c_string(text), "out") }
    })
}
