//! C ABI for `qscatter`.
//!
//! Objects are opaque handles created by `qs_*_new`/`qs_*_compute` and
//! released with the matching `qs_*_free`. Every fallible function returns a
//! [`QsStatus`]; on failure `qs_last_error` gives a message for the calling
//! thread. Absent results in [`QsTimeReport`] are NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use qscatter::channels::{Scenario, Side};
use qscatter::potential::{scatter_coeffs, transfer_matrix, Barrier, ScatterCoeffs};
use qscatter::timing::time_report;
use qscatter::{Error, KGrid};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Numerical = 5,
    StepSize = 6,
    Domain = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QsSide {
    Left = 0,
    Right = 1,
}

/// Opaque barrier handle.
pub struct QsBarrier(Barrier);

/// Opaque table of scattering functions on a k-grid.
pub struct QsCoeffs(ScatterCoeffs);

/// One row of a [`QsCoeffs`] table.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QsCoeffSample {
    pub k: f64,
    pub t: f64,
    pub r: f64,
    pub j: f64,
    pub f: f64,
    pub j_prime: f64,
    pub f_prime: f64,
}

/// Characteristic times of a Gaussian scenario in `ħ = m = 1` units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QsTimeReport {
    pub t_bar: f64,
    pub r_bar: f64,
    pub swpa_tr: f64,
    pub swpa_ref: f64,
    pub delay_tr: f64,
    pub delay_ref_minus: f64,
    pub delay_ref_plus: f64,
    pub spatial_delay_tr: f64,
    pub spatial_delay_ref: f64,
    pub t_start: f64,
    pub t_end_tr: f64,
    pub t_end_ref: f64,
    pub t_end: f64,
    pub tau_scatt: f64,
    pub scat_length_tr: f64,
    pub scat_length_ref: f64,
    pub tau_scatt_narrow: f64,
    /// Incident, transmitted and reflected completed-scattering flags.
    pub completed: [bool; 3],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> QsStatus {
    match e {
        Error::Parse { .. } => QsStatus::Parse,
        Error::Io(_) => QsStatus::Io,
        Error::StepSize(_) => QsStatus::StepSize,
        Error::Domain(_) => QsStatus::Domain,
        Error::PhaseUnwrap { .. }
        | Error::Consistency(_)
        | Error::ChannelEmpty { .. }
        | Error::EmptyPacket
        | Error::NoPositionLaw { .. }
        | Error::DegenerateModulus { .. }
        | Error::NegativeVariance(_) => QsStatus::Numerical,
        _ => QsStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), QsStatus>) -> QsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QsStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside qscatter".into());
            QsStatus::Panic
        }
    }
}

fn fail(e: Error) -> QsStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> QsStatus {
    set_error(format!("{what} is null"));
    QsStatus::NullPointer
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn qs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a barrier from `n` segments starting at `a`.
///
/// # Safety
/// `widths` and `heights` must point to `n` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qs_barrier_new(
    a: f64,
    widths: *const f64,
    heights: *const f64,
    n: usize,
    out: *mut *mut QsBarrier,
) -> QsStatus {
    guard(|| {
        if widths.is_null() || heights.is_null() {
            return Err(null("segment array"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let (w, h) = (slice::from_raw_parts(widths, n), slice::from_raw_parts(heights, n));
        let barrier = Barrier::new(a, w.iter().copied().zip(h.iter().copied())).map_err(fail)?;
        *out = Box::into_raw(Box::new(QsBarrier(barrier)));
        Ok(())
    })
}

/// Parse a barrier from the text format (`a <value>` then `<width> <height>`
/// lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_barrier_parse(text: *const c_char, out: *mut *mut QsBarrier) -> QsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| {
            set_error(format!("barrier text is not UTF-8: {e}"));
            QsStatus::InvalidArgument
        })?;
        let barrier = Barrier::parse(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(QsBarrier(barrier)));
        Ok(())
    })
}

/// # Safety
/// `barrier` must be null or a handle from `qs_barrier_new`/`qs_barrier_parse`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qs_barrier_free(barrier: *mut QsBarrier) {
    if !barrier.is_null() {
        drop(Box::from_raw(barrier));
    }
}

/// Transmission coefficient `T(k)`.
///
/// # Safety
/// `barrier` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_transmission(barrier: *const QsBarrier, k: f64, out: *mut f64) -> QsStatus {
    guard(|| {
        let barrier = barrier.as_ref().ok_or_else(|| null("barrier"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = transfer_matrix(&barrier.0, k).map_err(fail)?.transmission();
        Ok(())
    })
}

/// Tabulate the scattering functions on `n` uniform nodes of `[kmin, kmax]`.
///
/// # Safety
/// `barrier` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_coeffs_compute(
    barrier: *const QsBarrier,
    kmin: f64,
    kmax: f64,
    n: usize,
    out: *mut *mut QsCoeffs,
) -> QsStatus {
    guard(|| {
        let barrier = barrier.as_ref().ok_or_else(|| null("barrier"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = Arc::new(KGrid::uniform(kmin, kmax, n).map_err(fail)?);
        let coeffs = scatter_coeffs(&barrier.0, grid).map_err(fail)?;
        *out = Box::into_raw(Box::new(QsCoeffs(coeffs)));
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `coeffs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qs_coeffs_len(coeffs: *const QsCoeffs) -> usize {
    coeffs.as_ref().map_or(0, |c| c.0.len())
}

/// Row `i` of the table.
///
/// # Safety
/// `coeffs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qs_coeffs_get(coeffs: *const QsCoeffs, i: usize, out: *mut QsCoeffSample) -> QsStatus {
    guard(|| {
        let coeffs = coeffs.as_ref().ok_or_else(|| null("coeffs"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if i >= coeffs.0.len() {
            set_error(format!("row {i} out of range (len {})", coeffs.0.len()));
            return Err(QsStatus::InvalidArgument);
        }
        let s = coeffs.0.sample(i);
        *out = QsCoeffSample {
            k: s.k,
            t: s.t,
            r: s.r,
            j: s.j,
            f: s.f,
            j_prime: s.j_prime,
            f_prime: s.f_prime,
        };
        Ok(())
    })
}

/// # Safety
/// `coeffs` must be null or a live handle from `qs_coeffs_compute`.
#[no_mangle]
pub unsafe extern "C" fn qs_coeffs_free(coeffs: *mut QsCoeffs) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// Characteristic times of a Gaussian packet (`k0`, `l0`) incident from
/// `side` on a grid of `n` positive nodes. `x_r` is the start of a right-side
/// packet (NaN for the default); `narrow` adds the narrow-packet lengths.
///
/// # Safety
/// `barrier` must be a live handle; `out` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qs_time_report(
    barrier: *const QsBarrier,
    side: QsSide,
    k0: f64,
    l0: f64,
    x_r: f64,
    n: usize,
    l1: f64,
    l2: f64,
    narrow: bool,
    out: *mut QsTimeReport,
) -> QsStatus {
    guard(|| {
        let barrier = barrier.as_ref().ok_or_else(|| null("barrier"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let side = match side {
            QsSide::Left => Side::Left,
            QsSide::Right => Side::Right,
        };
        let x_r = if x_r.is_nan() { None } else { Some(x_r) };
        let grid = Arc::new(KGrid::centered(k0, l0, n).map_err(fail)?);
        let scenario = Scenario::new(side, k0, l0, x_r, grid.clone()).map_err(fail)?;
        let coeffs = scatter_coeffs(&barrier.0, grid).map_err(fail)?;
        let r = time_report(&scenario, &coeffs, l1, l2, narrow).map_err(fail)?;
        *out = QsTimeReport {
            t_bar: r.t_bar,
            r_bar: r.r_bar,
            swpa_tr: opt(r.swpa_tr),
            swpa_ref: opt(r.swpa_ref),
            delay_tr: opt(r.delay_tr),
            delay_ref_minus: opt(r.delay_ref_minus),
            delay_ref_plus: opt(r.delay_ref_plus),
            spatial_delay_tr: opt(r.spatial_delay_tr),
            spatial_delay_ref: opt(r.spatial_delay_ref),
            t_start: opt(r.t_start),
            t_end_tr: opt(r.t_end_tr),
            t_end_ref: opt(r.t_end_ref),
            t_end: opt(r.t_end),
            tau_scatt: opt(r.tau_scatt),
            scat_length_tr: opt(r.scat_length_tr),
            scat_length_ref: opt(r.scat_length_ref),
            tau_scatt_narrow: opt(r.tau_scatt_narrow),
            completed: r.completed,
        };
        Ok(())
    })
}
