//! C ABI for `linfball`.
//!
//! Matrices and projection results cross the boundary as opaque handles
//! (`LfbMatrix`, `LfbResult`) that the caller releases with the matching
//! `*_free` function. Every fallible call returns an `LfbStatus`; the message
//! of the last failure on the calling thread is available from
//! [`lfb_last_error`]. Panics never unwind into C: they are caught and
//! reported as `LFB_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linfball::l1ball::project_l1_michelot;
use linfball::{Error, GroupMatrix, Method, MethodProjector, ProjectionResult, Projector};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfbStatus {
    Ok = 0,
    /// A dimension, radius, option or buffer length was rejected.
    InvalidArgument = 1,
    /// A required pointer argument was null.
    NullPointer = 2,
    /// The root search hit its iteration limit. The result handle is still
    /// produced and holds the best iterate.
    NotConverged = 3,
    /// Input contained NaN or infinity.
    NonFinite = 4,
    /// Internal error or caught panic.
    Internal = 5,
}

/// Root-search method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfbMethod {
    Newton = 0,
    /// Brent's method on the search function (no pruning, zero start).
    Grf = 1,
    /// Modified Steffensen iteration.
    Srf = 2,
}

/// Projection options; obtain defaults from [`lfb_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfbOptions {
    pub method: LfbMethod,
    /// Stop once `|f(gamma)| <= tolerance * max(1, tau)`.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Ignored by `LFB_METHOD_GRF`.
    pub use_initial_point: bool,
    /// Ignored by `LFB_METHOD_GRF`.
    pub use_pruning: bool,
}

/// Opaque dense row-major matrix.
pub struct LfbMatrix(GroupMatrix);

/// Opaque projection result.
pub struct LfbResult {
    inner: ProjectionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> LfbStatus {
    match err {
        Error::InvalidArgument(_) | Error::Parse { .. } => LfbStatus::InvalidArgument,
        Error::NonFinite(_) => LfbStatus::NonFinite,
        Error::NotConverged { .. } => LfbStatus::NotConverged,
        Error::InvalidState(_) | Error::Io { .. } => LfbStatus::Internal,
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<LfbStatus, (LfbStatus, String)>) -> LfbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            LfbStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (LfbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LfbStatus, String) {
    (LfbStatus::NullPointer, format!("`{what}` is null"))
}

/// Human-readable name of a status code. The string is static.
#[no_mangle]
pub extern "C" fn lfb_status_string(status: LfbStatus) -> *const c_char {
    let s: &'static CStr = match status {
        LfbStatus::Ok => c"ok",
        LfbStatus::InvalidArgument => c"invalid argument",
        LfbStatus::NullPointer => c"null pointer",
        LfbStatus::NotConverged => c"not converged",
        LfbStatus::NonFinite => c"non-finite input",
        LfbStatus::Internal => c"internal error",
    };
    s.as_ptr()
}

/// Message describing the last failure on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lfb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn lfb_options_default() -> LfbOptions {
    let d = linfball::SolverOptions::default();
    LfbOptions {
        method: LfbMethod::Newton,
        tolerance: d.tolerance,
        max_iter: d.max_iter,
        use_initial_point: d.use_initial_point,
        use_pruning: d.use_pruning,
    }
}

/// Copies `rows * cols` row-major values into a new matrix handle.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles and `out` must be a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut LfbMatrix,
) -> LfbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        let len = rows.checked_mul(cols).ok_or_else(|| {
            (
                LfbStatus::InvalidArgument,
                format!("{rows}x{cols} overflows"),
            )
        })?;
        // SAFETY: the caller guarantees `len` readable doubles at `data`.
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let m = GroupMatrix::from_vec(rows, cols, values).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(LfbMatrix(m)));
        Ok(LfbStatus::Ok)
    })
}

/// # Safety
/// `matrix` must be null or a handle from [`lfb_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lfb_matrix_free(matrix: *mut LfbMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_matrix_rows(matrix: *const LfbMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.rows())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_matrix_cols(matrix: *const LfbMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.cols())
}

/// `max_m sum_i |B_mi|`, or NaN for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_matrix_norm_linf_1(matrix: *const LfbMatrix) -> f64 {
    matrix.as_ref().map_or(f64::NAN, |m| m.0.norm_linf_1())
}

/// Projects `matrix` onto `{X : sum_m max_i |X_mi| <= tau}`.
///
/// `options` may be null for the defaults. On `LFB_STATUS_OK` and
/// `LFB_STATUS_NOT_CONVERGED` a result handle is written to `out`; on any
/// other status `*out` is set to null.
///
/// # Safety
/// `matrix` must be a live handle, `options` null or valid, and `out` a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_project(
    matrix: *const LfbMatrix,
    tau: f64,
    options: *const LfbOptions,
    out: *mut *mut LfbResult,
) -> LfbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = &matrix.as_ref().ok_or_else(|| null("matrix"))?.0;
        let opts = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| lfb_options_default());
        let method = match opts.method {
            LfbMethod::Newton => Method::Newton,
            LfbMethod::Grf => Method::Grf,
            LfbMethod::Srf => Method::Srf,
        };
        let mut projector = MethodProjector::new(method);
        projector.options.tolerance = opts.tolerance;
        projector.options.max_iter = opts.max_iter;
        projector.steffensen.tol_c = opts.tolerance;
        projector.steffensen.max_iter = opts.max_iter;
        if method != Method::Grf {
            projector = projector
                .with_pruning(opts.use_pruning)
                .with_initial_point(opts.use_initial_point);
        }
        let r = projector.project(b, tau).map_err(lib_err)?;
        let status = if r.converged {
            LfbStatus::Ok
        } else {
            set_last_error(format!(
                "no convergence after {} iterations (|f| = {:e})",
                r.iterations, r.residual
            ));
            LfbStatus::NotConverged
        };
        *out = Box::into_raw(Box::new(LfbResult { inner: r }));
        Ok(status)
    })
}

/// # Safety
/// `result` must be null or a handle from [`lfb_project`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_free(result: *mut LfbResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Copies the projected matrix, row-major, into `buf` of length `len`
/// (which must equal rows * cols of the input).
///
/// # Safety
/// `result` must be a live handle and `buf` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_copy_x(
    result: *const LfbResult,
    buf: *mut f64,
    len: usize,
) -> LfbStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let x = r.inner.x.as_slice();
        if len != x.len() {
            return Err((
                LfbStatus::InvalidArgument,
                format!("buffer holds {len} values, result has {}", x.len()),
            ));
        }
        // SAFETY: the caller guarantees `len` writable doubles at `buf`.
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(x);
        Ok(LfbStatus::Ok)
    })
}

/// Root `gamma*` of the search function, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_gamma(result: *const LfbResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.gamma_star)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_iterations(result: *const LfbResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.iterations)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_evaluations(result: *const LfbResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.evaluations)
}

/// `|f(gamma)|` at the returned point, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_residual(result: *const LfbResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.residual)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_converged(result: *const LfbResult) -> bool {
    result.as_ref().is_some_and(|r| r.inner.converged)
}

/// Wall time of the projection in seconds, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_elapsed_seconds(result: *const LfbResult) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.inner.elapsed.as_secs_f64())
}

/// Percentage of rows of the projection with a nonzero entry.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lfb_result_sparsity_percent(result: *const LfbResult) -> f64 {
    result
        .as_ref()
        .map_or(f64::NAN, |r| r.inner.sparsity_percent())
}

/// Projects the vector `u` of length `n` onto the ℓ1 ball of `radius`,
/// writing the result to `out` (which may alias `u`). `threshold` may be
/// null; otherwise it receives the soft-threshold that was applied.
///
/// # Safety
/// `u` must point to `n` readable doubles and `out` to `n` writable ones.
#[no_mangle]
pub unsafe extern "C" fn lfb_project_l1(
    u: *const f64,
    n: usize,
    radius: f64,
    out: *mut f64,
    threshold: *mut f64,
) -> LfbStatus {
    guard(|| {
        if u.is_null() {
            return Err(null("u"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: `u` has `n` readable doubles; copied before `out` is written.
        let input = std::slice::from_raw_parts(u, n).to_vec();
        let p = project_l1_michelot(&input, radius).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&p.projected);
        if let Some(t) = threshold.as_mut() {
            *t = p.threshold;
        }
        Ok(LfbStatus::Ok)
    })
}
