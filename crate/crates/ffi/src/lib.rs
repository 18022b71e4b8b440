//! C interface to the gauge-geometry and spherical-spectrum kernels.
//!
//! Conventions, mirrored in the generated `include/grushin_lab.h`:
//!
//! * every fallible function returns a [`GrushinLabStatus`] and writes its
//!   results through caller-provided pointers only on success;
//! * parameter handles are opaque; release them with
//!   [`grushin_lab_params_free`] (freeing a null handle is a no-op);
//! * on failure a thread-local message describes the problem; copy it out
//!   with [`grushin_lab_last_error_message`];
//! * panics never unwind across the boundary — they are caught and
//!   reported as [`GrushinLabStatus::Panic`].

// Pointer contracts are stated in each function's C-facing documentation
// (and carried into the generated header); separate `# Safety` headings
// would duplicate them in a Rust-only idiom.
#![allow(clippy::missing_safety_doc)]

use grushin_lab::error::Error;
use grushin_lab::geometry::{dilate, gauge_norm, psi_alpha, GrushinParams, Point};
use grushin_lab::spectrum::{degree_from_mu, mu_from_degree, sl_solve, Parity, SectorSpec};
use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every fallible interface function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GrushinLabStatus {
    /// The call succeeded and all outputs were written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument violated a documented precondition.
    InvalidArgument = 2,
    /// A mathematical invariant failed on computed data.
    Invariant = 3,
    /// An iterative computation did not reach its tolerance.
    NonConvergence = 4,
    /// A panic was caught at the interface boundary.
    Panic = 5,
}

/// Reflection-symmetry tag for spectral sectors of a scalar first block.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GrushinLabParity {
    /// No parity restriction (two-or-more-dimensional first block).
    Any = 0,
    /// Even under reflection of the first block.
    Even = 1,
    /// Odd under reflection of the first block.
    Odd = 2,
}

/// Opaque handle to a validated parameter triple (block dimensions and
/// degeneracy exponent).
pub struct GrushinLabParams {
    inner: GrushinParams,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().clear());
}

fn fail(status: GrushinLabStatus, msg: impl Into<String>) -> GrushinLabStatus {
    set_error(msg);
    status
}

fn fail_from(err: &Error) -> GrushinLabStatus {
    let status = match err {
        Error::Invariant(_) => GrushinLabStatus::Invariant,
        Error::NonConvergence(_) => GrushinLabStatus::NonConvergence,
        _ => GrushinLabStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn ok() -> GrushinLabStatus {
    clear_error();
    GrushinLabStatus::Ok
}

/// Runs the body behind an unwind barrier so panics surface as a status.
fn guarded<F: FnOnce() -> GrushinLabStatus>(f: F) -> GrushinLabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(
            GrushinLabStatus::Panic,
            "panic caught at the interface boundary",
        ),
    }
}

/// Borrows `len` doubles from a C pointer; `None` when null with `len > 0`.
unsafe fn slice_in<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(unsafe { std::slice::from_raw_parts(ptr, len) })
    }
}

/// Borrows the parameter triple behind a handle.
unsafe fn params_in<'a>(handle: *const GrushinLabParams) -> Option<&'a GrushinParams> {
    unsafe { handle.as_ref() }.map(|h| &h.inner)
}

/// Builds a point from two coordinate blocks, checking pointers and block
/// lengths against the handle.
unsafe fn point_in(
    params: &GrushinParams,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
) -> Result<Point, GrushinLabStatus> {
    let x = unsafe { slice_in(x, x_len) }
        .ok_or_else(|| fail(GrushinLabStatus::NullPointer, "`x` is null"))?;
    let y = unsafe { slice_in(y, y_len) }
        .ok_or_else(|| fail(GrushinLabStatus::NullPointer, "`y` is null"))?;
    if x.len() != params.h || y.len() != params.k {
        return Err(fail(
            GrushinLabStatus::InvalidArgument,
            format!(
                "block lengths ({}, {}) do not match the handle's dimensions ({}, {})",
                x.len(),
                y.len(),
                params.h,
                params.k
            ),
        ));
    }
    Ok(Point::new(x.to_vec(), y.to_vec()))
}

/// Allocates a validated parameter handle.
///
/// `h` and `k` are the block dimensions (each at least 1), `alpha` the
/// integer degeneracy exponent.  On success `*out` owns the handle.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_params_new(
    h: usize,
    k: usize,
    alpha: u32,
    out: *mut *mut GrushinLabParams,
) -> GrushinLabStatus {
    guarded(|| {
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        match GrushinParams::new(h, k, alpha) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(GrushinLabParams { inner })) };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Releases a parameter handle.  Null is accepted and ignored.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_params_free(params: *mut GrushinLabParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Writes the homogeneous dimension `h + (1 + alpha) k` to `*out`.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_homogeneous_dimension(
    params: *const GrushinLabParams,
    out: *mut usize,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        unsafe { *out = p.q() };
        ok()
    })
}

/// Writes the gauge norm of the point `(x, y)` to `*out`.
///
/// `x` must hold `h` doubles and `y` must hold `k` doubles, matching the
/// dimensions of the handle.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_gauge_norm(
    params: *const GrushinLabParams,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        let pt = match unsafe { point_in(p, x, x_len, y, y_len) } {
            Ok(pt) => pt,
            Err(status) => return status,
        };
        match gauge_norm(p, &pt) {
            Ok(v) => {
                unsafe { *out = v };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Writes the degenerate angular weight of the point `(x, y)` to `*out`.
///
/// The weight is `(|x| / d)^(2 alpha)` with `d` the gauge norm; it lies in
/// `[0, 1]` and is undefined at the origin.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_psi_alpha(
    params: *const GrushinLabParams,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        let pt = match unsafe { point_in(p, x, x_len, y, y_len) } {
            Ok(pt) => pt,
            Err(status) => return status,
        };
        match psi_alpha(p, &pt) {
            Ok(v) => {
                unsafe { *out = v };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Applies the anisotropic dilation of factor `lambda > 0` to `(x, y)`.
///
/// The scaled first block (`h` doubles) is written to `out_x` and the
/// scaled second block (`k` doubles) to `out_y`; outputs may alias the
/// inputs.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_dilate(
    params: *const GrushinLabParams,
    lambda: f64,
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out_x: *mut f64,
    out_y: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out_x.is_null() || out_y.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out_x` or `out_y` is null");
        }
        let pt = match unsafe { point_in(p, x, x_len, y, y_len) } {
            Ok(pt) => pt,
            Err(status) => return status,
        };
        match dilate(p, lambda, &pt) {
            Ok(scaled) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(scaled.x.as_ptr(), out_x, scaled.x.len());
                    std::ptr::copy_nonoverlapping(scaled.y.as_ptr(), out_y, scaled.y.len());
                }
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Writes the spherical eigenvalue of an integer-degree harmonic to `*out`.
///
/// Only established for a first block of dimension at least 2; scalar
/// first blocks are refused.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_eigenvalue_from_degree(
    params: *const GrushinLabParams,
    degree: u32,
    out: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        match mu_from_degree(p, degree) {
            Ok(v) => {
                unsafe { *out = v };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Writes the homogeneity degree whose formula eigenvalue is `mu` to
/// `*out` (the inverse of `grushin_lab_eigenvalue_from_degree`, extended
/// to real degrees).
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_degree_from_eigenvalue(
    params: *const GrushinLabParams,
    mu: f64,
    out: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out` is null");
        }
        match degree_from_mu(p, mu) {
            Ok(v) => {
                unsafe { *out = v };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Solves one spectral sector and writes its `count` smallest eigenvalues
/// to `out_mu` in increasing order.
///
/// `l` and `m` are the harmonic degrees of the two blocks; `parity` must
/// be even or odd exactly when the first block is scalar (`h = 1`, where
/// `l` must be 0) and `Any` otherwise.  `resolution` controls the angular
/// discretization; `count` may not exceed half of it.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_sector_spectrum(
    params: *const GrushinLabParams,
    l: u32,
    m: u32,
    parity: GrushinLabParity,
    count: usize,
    resolution: usize,
    out_mu: *mut f64,
) -> GrushinLabStatus {
    guarded(|| {
        let Some(p) = (unsafe { params_in(params) }) else {
            return fail(GrushinLabStatus::NullPointer, "`params` is null");
        };
        if out_mu.is_null() {
            return fail(GrushinLabStatus::NullPointer, "`out_mu` is null");
        }
        let sector = match parity {
            GrushinLabParity::Any => SectorSpec::new(l, m),
            GrushinLabParity::Even | GrushinLabParity::Odd => {
                if l != 0 {
                    return fail(
                        GrushinLabStatus::InvalidArgument,
                        "a parity-tagged sector fixes the first block's degree to 0",
                    );
                }
                let tag = if parity == GrushinLabParity::Even {
                    Parity::Even
                } else {
                    Parity::Odd
                };
                SectorSpec::with_parity(m, tag)
            }
        };
        match sl_solve(p, &sector, count, resolution) {
            Ok(result) => {
                unsafe {
                    std::ptr::copy_nonoverlapping(result.mu.as_ptr(), out_mu, result.mu.len())
                };
                ok()
            }
            Err(e) => fail_from(&e),
        }
    })
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating to `cap - 1` bytes, and returns the
/// full message length in bytes (excluding the terminator).
///
/// A null `buf` or zero `cap` writes nothing and just reports the length.
/// Any successful interface call clears the message; reading it does not.
#[no_mangle]
pub unsafe extern "C" fn grushin_lab_last_error_message(
    buf: *mut c_char,
    cap: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Returns the library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn grushin_lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
