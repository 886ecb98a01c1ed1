//! C ABI over `polycap`.
//!
//! Objects cross the boundary as opaque handles created by `pc_*_new`/`pc_*_from_json`
//! and released with the matching `pc_*_free`. Every fallible call returns a
//! `PcStatus`; on failure `pc_last_error` describes the cause (per thread).
//! Panics are caught and reported as `PC_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use num_complex::Complex64;
use polycap::capacity::{self, EquilibriumResult};
use polycap::series::{self, CoeffArray};
use polycap::setspec::SetFile;
use polycap::{Error, GridSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    BufferTooSmall = 4,
    ResourceLimit = 5,
    Panic = 6,
}

/// Grid set on the n-torus.
pub struct PcSet(GridSet);

/// Solved equilibrium problem.
pub struct PcEquilibrium(EquilibriumResult);

/// Multi-indexed coefficient array.
pub struct PcCoeffs(CoeffArray);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PcSummary {
    pub capacity: f64,
    pub mass: f64,
    pub energy: f64,
    pub residual: f64,
    pub violation_fraction: f64,
    pub iterations: size_t,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::ResourceGuard(_) => PcStatus::ResourceLimit,
        _ => PcStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<PcStatus, (PcStatus, String)>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == PcStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PcStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (PcStatus, String) {
    (PcStatus::NullPointer, format!("{name}: null pointer"))
}

unsafe fn read_str<'a>(name: &str, s: *const c_char) -> Result<&'a str, (PcStatus, String)> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (PcStatus::InvalidArgument, format!("{name}: not UTF-8 ({e})")))
}

unsafe fn slice<'a, T>(name: &str, p: *const T, len: usize) -> Result<&'a [T], (PcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(name: &str, p: *const T) -> Result<&'a T, (PcStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `c_k = Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1))`.
#[no_mangle]
pub extern "C" fn pc_binom_coeff_c(k: u64) -> f64 {
    polycap::kernels::binom_coeff_c(k)
}

/// Build a set from a JSON document `{"n": .., "m": .., "set": {...}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_set_from_json(json: *const c_char, out: *mut *mut PcSet) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str("json", json)?;
        let set = SetFile::parse(text).and_then(|f| f.build()).map_err(lib)?;
        *out = Box::into_raw(Box::new(PcSet(set)));
        Ok(PcStatus::Ok)
    })
}

/// Number of grid points in the set (0 for a null handle).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_set_count(set: *const PcSet) -> size_t {
    set.as_ref().map_or(0, |s| s.0.count())
}

/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_set_free(set: *mut PcSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Solve for the equilibrium measure. Returns `PC_STATUS_NOT_CONVERGED` (with
/// a valid handle in `out`) when `max_iter` ran out.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_equilibrium_solve(set: *const PcSet, tol: f64, max_iter: size_t, out: *mut *mut PcEquilibrium) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let set = handle("set", set)?;
        let r = capacity::equilibrium(&set.0, tol, max_iter).map_err(lib)?;
        let converged = r.converged;
        *out = Box::into_raw(Box::new(PcEquilibrium(r)));
        if converged {
            Ok(PcStatus::Ok)
        } else {
            set_error("equilibrium solver reached max_iter before converging");
            Ok(PcStatus::NotConverged)
        }
    })
}

/// # Safety
/// `eq` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_equilibrium_summary(eq: *const PcEquilibrium, out: *mut PcSummary) -> PcStatus {
    guard(|| {
        let eq = handle("eq", eq)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = eq.0.summary();
        *out = PcSummary {
            capacity: s.capacity,
            mass: s.mass,
            energy: s.energy,
            residual: s.residual,
            violation_fraction: s.violation_fraction,
            iterations: s.iterations,
            converged: s.converged,
        };
        Ok(PcStatus::Ok)
    })
}

/// Copy the measure's weights (row-major over the grid) into `buf`. `len` is
/// the buffer length; `written` receives the number of grid points, also when
/// the buffer is too small.
///
/// # Safety
/// `buf` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn pc_equilibrium_weights(eq: *const PcEquilibrium, buf: *mut f64, len: size_t, written: *mut size_t) -> PcStatus {
    guard(|| {
        let eq = handle("eq", eq)?;
        let w = eq.0.measure.weights();
        if !written.is_null() {
            *written = w.len();
        }
        if len < w.len() {
            return Err((PcStatus::BufferTooSmall, format!("len: {len} < {}", w.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(w.as_ptr(), buf, w.len());
        Ok(PcStatus::Ok)
    })
}

/// # Safety
/// `eq` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_equilibrium_free(eq: *mut PcEquilibrium) {
    if !eq.is_null() {
        drop(Box::from_raw(eq));
    }
}

/// Parse a coefficient file (`{"n", "shape", "d", "values": [[re, im], ...]}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_coeffs_from_json(json: *const c_char, out: *mut *mut PcCoeffs) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str("json", json)?;
        let f: CoeffArray = serde_json::from_str(text).map_err(|e| (PcStatus::InvalidArgument, format!("coeffs: {e}")))?;
        *out = Box::into_raw(Box::new(PcCoeffs(f)));
        Ok(PcStatus::Ok)
    })
}

/// Number of variables `n` (0 for a null handle).
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_coeffs_ndim(f: *const PcCoeffs) -> size_t {
    f.as_ref().map_or(0, |f| f.0.n())
}

/// Number of vector components `d` (0 for a null handle).
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_coeffs_components(f: *const PcCoeffs) -> size_t {
    f.as_ref().map_or(0, |f| f.0.d())
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pc_coeffs_free(f: *mut PcCoeffs) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

unsafe fn write_complex(value: &[Complex64], out: *mut f64, out_len: usize) -> Result<PcStatus, (PcStatus, String)> {
    if out_len < 2 * value.len() {
        return Err((PcStatus::BufferTooSmall, format!("out_len: {out_len} < {}", 2 * value.len())));
    }
    if out.is_null() {
        return Err(null("out"));
    }
    for (c, z) in value.iter().enumerate() {
        *out.add(2 * c) = z.re;
        *out.add(2 * c + 1) = z.im;
    }
    Ok(PcStatus::Ok)
}

/// Rectangular partial sum `S_N f(theta)`; `n_max` and `theta` have `n`
/// entries. `out` receives `d` interleaved (re, im) pairs.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pc_rect_partial_sum(
    f: *const PcCoeffs,
    n_max: *const size_t,
    theta: *const f64,
    n: size_t,
    out: *mut f64,
    out_len: size_t,
) -> PcStatus {
    guard(|| {
        let f = handle("f", f)?;
        let n_max = slice("n_max", n_max, n)?;
        let theta = slice("theta", theta, n)?;
        let v = series::rect_partial_sum(&f.0, n_max, theta).map_err(lib)?;
        write_complex(&v, out, out_len)
    })
}

/// Abel mean `P_r f(theta)`; `r` and `theta` have `n` entries. `out` receives
/// `d` interleaved (re, im) pairs.
///
/// # Safety
/// Pointers must reference arrays of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn pc_abel_mean(f: *const PcCoeffs, r: *const f64, theta: *const f64, n: size_t, out: *mut f64, out_len: size_t) -> PcStatus {
    guard(|| {
        let f = handle("f", f)?;
        let r = slice("r", r, n)?;
        let theta = slice("theta", theta, n)?;
        let v = series::abel_mean(&f.0, r, theta).map_err(lib)?;
        write_complex(&v, out, out_len)
    })
}
