//! C ABI for anosov-lab.
//!
//! Objects cross the boundary as opaque handles owned by the caller and freed
//! with the matching `*_free`. Every fallible call returns an [`AlStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`al_last_error`]. Strings returned through out-pointers are released
//! with [`al_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use anosov_lab::conjugacy::{solve_conjugacy, ConjugacyField, ConjugacyOptions, Perturbation};
use anosov_lab::dynamics::count_fixed;
use anosov_lab::exact::IntMatrix;
use anosov_lab::spectral::{classify_with, ClassifyOptions};
use anosov_lab::Error;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Undecided = 3,
    NotHyperbolic = 4,
    BudgetExceeded = 5,
    NoConvergence = 6,
    Overflow = 7,
    Failed = 8,
    Panic = 9,
}

pub struct AlMatrix {
    inner: IntMatrix,
}

pub struct AlConjugacy {
    inner: ConjugacyField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AlStatus {
    match e {
        Error::InvalidInput(_) | Error::NotMonic { .. } | Error::NotUnimodular { .. } | Error::NotPeriodic { .. } => AlStatus::InvalidInput,
        Error::Undecided(_) | Error::PrecisionExhausted { .. } => AlStatus::Undecided,
        Error::NotHyperbolic(_) => AlStatus::NotHyperbolic,
        Error::BudgetExceeded(_) | Error::HorizonTooLong(_) => AlStatus::BudgetExceeded,
        Error::NoConvergence { .. } => AlStatus::NoConvergence,
        _ => AlStatus::Failed,
    }
}

fn guard<F: FnOnce() -> Result<(), (AlStatus, String)>>(f: F) -> AlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AlStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            AlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (AlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AlStatus, String) {
    (AlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (AlStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn al_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn al_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn al_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// dim × dim matrix from row-major entries.
///
/// # Safety
/// `entries` must point to dim² readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn al_matrix_new(entries: *const i64, dim: usize, out: *mut *mut AlMatrix) -> AlStatus {
    guard(|| {
        if entries.is_null() {
            return Err(null("entries"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = dim.checked_mul(dim).ok_or((AlStatus::Overflow, "dimension overflows".to_string()))?;
        let flat = std::slice::from_raw_parts(entries, n);
        let rows: Vec<Vec<i64>> = flat.chunks(dim.max(1)).map(|r| r.to_vec()).collect();
        let m = IntMatrix::from_i64_rows(&rows).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AlMatrix { inner: m }));
        Ok(())
    })
}

/// Built-in name (cat, B3, C6, D4), inline JSON rows, or a path to a JSON file.
///
/// # Safety
/// `src` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn al_matrix_parse(src: *const c_char, out: *mut *mut AlMatrix) -> AlStatus {
    guard(|| {
        let s = read_str(src, "src")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = anosov_lab::cli::parse_matrix(s).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AlMatrix { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from `al_matrix_new`/`al_matrix_parse` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn al_matrix_free(m: *mut AlMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live matrix handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn al_matrix_dim(m: *const AlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.dim())
}

/// Classify against the theorem's hypotheses. `report_json` may be NULL;
/// otherwise it receives a JSON report to release with `al_string_free`.
///
/// # Safety
/// `m` must be a live handle; `satisfies` must be writable.
#[no_mangle]
pub unsafe extern "C" fn al_classify(m: *const AlMatrix, satisfies: *mut bool, report_json: *mut *mut c_char) -> AlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if satisfies.is_null() {
            return Err(null("satisfies"));
        }
        let r = classify_with(&m.inner, &ClassifyOptions::default()).map_err(lib_err)?;
        *satisfies = r.flags.satisfies_theorem;
        if !report_json.is_null() {
            let s = serde_json::to_string(&r).map_err(|e| (AlStatus::Failed, e.to_string()))?;
            *report_json = to_c(s);
        }
        Ok(())
    })
}

/// Number of points fixed by Lⁿ.
///
/// # Safety
/// `m` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn al_count_fixed(m: *const AlMatrix, n: u32, count: *mut u64) -> AlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let c = count_fixed(&m.inner, n).map_err(lib_err)?;
        *count = c.to_u64().ok_or((AlStatus::Overflow, format!("{c} does not fit in 64 bits")))?;
        Ok(())
    })
}

/// Solve h∘L = f∘h for f = L + εp, p a named sample perturbation
/// (sample1, sample4). `grid` = 0 picks the solve grid automatically.
///
/// # Safety
/// `m` must be a live handle, `pert` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_conjugacy_solve(
    m: *const AlMatrix,
    pert: *const c_char,
    epsilon: f64,
    tol: f64,
    grid: usize,
    out: *mut *mut AlConjugacy,
) -> AlStatus {
    guard(|| {
        let m = m.as_ref().ok_or_else(|| null("matrix"))?;
        let name = read_str(pert, "pert")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = Perturbation::by_name(name, epsilon).map_err(lib_err)?;
        let opts = ConjugacyOptions { tol, grid: (grid > 0).then_some(grid), ..Default::default() };
        let f = solve_conjugacy(&m.inner, &p, &opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AlConjugacy { inner: f }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `al_conjugacy_solve` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn al_conjugacy_free(h: *mut AlConjugacy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Verified residual sup|h∘L − f∘h|; NaN for a NULL handle.
///
/// # Safety
/// `h` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn al_conjugacy_residual(h: *const AlConjugacy) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.inner.residual)
}

/// h(x) for x ∈ R^dim (lifted; the result is x + u(x)).
///
/// # Safety
/// `x` and `out` must each hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn al_conjugacy_eval(h: *const AlConjugacy, x: *const f64, dim: usize, out: *mut f64) -> AlStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        if x.is_null() || out.is_null() {
            return Err(null("x or out"));
        }
        if dim != h.inner.dim {
            return Err((AlStatus::InvalidInput, format!("point of dimension {dim}, field of dimension {}", h.inner.dim)));
        }
        let xs = std::slice::from_raw_parts(x, dim);
        let y = h.inner.h_at(xs).map_err(lib_err)?;
        std::ptr::copy_nonoverlapping(y.as_ptr(), out, dim);
        Ok(())
    })
}

/// JSON summary of the field, released with `al_string_free`.
///
/// # Safety
/// `h` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn al_conjugacy_report(h: *const AlConjugacy, out: *mut *mut c_char) -> AlStatus {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&h.inner).map_err(|e| (AlStatus::Failed, e.to_string()))?;
        *out = to_c(s);
        Ok(())
    })
}
