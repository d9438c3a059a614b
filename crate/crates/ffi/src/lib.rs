//! C ABI over `gstamp-core`.
//!
//! Objects cross the boundary as opaque handles, released with the
//! matching `*_free`. Every fallible
//! call returns a [`GsStatus`]; on failure a message is stored per thread
//! and can be copied out with [`gs_last_error_message`]. The frame
//! constants are the library defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gstamp_core::catalog::{parse_catalog, reference_snapshot, Catalog};
use gstamp_core::epoch::{propagate_catalog, recover_epoch, time_resolution, Propagation, RecoverOptions};
use gstamp_core::frames::FrameParams;
use gstamp_core::stamp::{
    build_location_map, decode_stamp, encode_stamp, locate_sender, match_anchors, select_anchors, LocationMap,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    NumericalError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Opaque catalog handle.
pub struct GsCatalog {
    inner: Catalog,
}

/// Opaque location-map handle.
pub struct GsLocationMap {
    inner: LocationMap,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsEpochEstimate {
    pub dt_myr: f64,
    pub residual_kpc: f64,
    pub bound_myr: f64,
    /// Galactocentric sender position at the stamp epoch, kpc.
    pub sender: GsVec3,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: GsStatus, msg: impl std::fmt::Display) -> GsStatus {
    set_error(msg.to_string());
    status
}

/// Runs `f`, converting panics into `GsStatus::Panic`.
fn guard(f: impl FnOnce() -> GsStatus) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(GsStatus::Panic, "internal panic"),
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Length in bytes of the last error message on this thread, excluding
/// the terminating NUL.
#[no_mangle]
pub extern "C" fn gs_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (NUL-terminated). Fails with
/// `BufferTooSmall` when `cap` is not larger than the message length.
///
/// # Safety
/// `buf` must be valid for `cap` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn gs_last_error_message(buf: *mut c_char, cap: usize) -> GsStatus {
    if buf.is_null() {
        return GsStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if cap <= msg.len() {
            return GsStatus::BufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), msg.len());
        *buf.add(msg.len()) = 0;
        GsStatus::Ok
    })
}

/// Time for a speed of `v_kms` to cover `dd_kpc`, in years.
///
/// # Safety
/// `out_years` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_time_resolution(dd_kpc: f64, v_kms: f64, out_years: *mut f64) -> GsStatus {
    if out_years.is_null() {
        return GsStatus::NullPointer;
    }
    match time_resolution(dd_kpc, v_kms) {
        Ok(t) => {
            *out_years = t;
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::InvalidArgument, e),
    }
}

/// The bundled 164-record reference snapshot.
///
/// # Safety
/// `out` must be a valid pointer; the handle must be freed with
/// [`gs_catalog_free`].
#[no_mangle]
pub unsafe extern "C" fn gs_catalog_reference(out: *mut *mut GsCatalog) -> GsStatus {
    if out.is_null() {
        return GsStatus::NullPointer;
    }
    guard(|| {
        *out = boxed(GsCatalog { inner: reference_snapshot() });
        GsStatus::Ok
    })
}

/// Parses canonical catalog CSV text.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_catalog_parse_csv(csv: *const c_char, epoch_jyear: f64, out: *mut *mut GsCatalog) -> GsStatus {
    if csv.is_null() || out.is_null() {
        return GsStatus::NullPointer;
    }
    guard(|| {
        let Ok(text) = CStr::from_ptr(csv).to_str() else {
            return fail(GsStatus::DataError, "catalog text is not UTF-8");
        };
        match parse_catalog(text, epoch_jyear) {
            Ok(c) => {
                *out = boxed(GsCatalog { inner: c });
                GsStatus::Ok
            }
            Err(e) => fail(GsStatus::DataError, e),
        }
    })
}

/// Number of records; 0 for a null handle.
///
/// # Safety
/// `cat` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_catalog_len(cat: *const GsCatalog) -> usize {
    cat.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `cat` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_catalog_free(cat: *mut GsCatalog) {
    if !cat.is_null() {
        drop(Box::from_raw(cat));
    }
}

/// The catalog as observed `dt_myr` later, moving clusters in straight
/// lines.
///
/// # Safety
/// `cat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_catalog_propagate(cat: *const GsCatalog, dt_myr: f64, out: *mut *mut GsCatalog) -> GsStatus {
    let (Some(cat), false) = (cat.as_ref(), out.is_null()) else {
        return GsStatus::NullPointer;
    };
    guard(|| match propagate_catalog(&cat.inner, &FrameParams::default(), dt_myr, &Propagation::Linear) {
        Ok(c) => {
            *out = boxed(GsCatalog { inner: c });
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::NumericalError, e),
    })
}

/// Selects `k` anchors at least `min_sep_kpc` apart and builds the map.
///
/// # Safety
/// `cat` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_map_build(
    cat: *const GsCatalog,
    k: usize,
    min_sep_kpc: f64,
    out: *mut *mut GsLocationMap,
) -> GsStatus {
    let (Some(cat), false) = (cat.as_ref(), out.is_null()) else {
        return GsStatus::NullPointer;
    };
    guard(|| {
        let fp = FrameParams::default();
        let map = select_anchors(&cat.inner, &fp, k, min_sep_kpc)
            .and_then(|idx| build_location_map(&cat.inner, &fp, &idx));
        match map {
            Ok(m) => {
                *out = boxed(GsLocationMap { inner: m });
                GsStatus::Ok
            }
            Err(e) => fail(GsStatus::InvalidArgument, e),
        }
    })
}

/// Number of anchors; 0 for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_map_anchor_count(map: *const GsLocationMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.k())
}

/// Epoch of the map, Julian year; NaN for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_map_epoch(map: *const GsLocationMap) -> f64 {
    map.as_ref().map_or(f64::NAN, |m| m.inner.epoch_jyear)
}

/// Encodes the map. `*out_len` always receives the required size; with a
/// null or short `buf` the call returns `BufferTooSmall` and writes
/// nothing else.
///
/// # Safety
/// `map` must be a live handle, `out_len` valid, and `buf` (when not
/// null) valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn gs_map_encode(map: *const GsLocationMap, buf: *mut u8, cap: usize, out_len: *mut usize) -> GsStatus {
    let (Some(map), false) = (map.as_ref(), out_len.is_null()) else {
        return GsStatus::NullPointer;
    };
    guard(|| match encode_stamp(&map.inner) {
        Ok(bytes) => {
            let b = bytes.as_bytes();
            *out_len = b.len();
            if buf.is_null() || cap < b.len() {
                return fail(GsStatus::BufferTooSmall, format!("need {} bytes", b.len()));
            }
            std::ptr::copy_nonoverlapping(b.as_ptr(), buf, b.len());
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::DataError, e),
    })
}

/// Decodes stamp bytes.
///
/// # Safety
/// `bytes` must be valid for `len` bytes and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_map_decode(bytes: *const u8, len: usize, out: *mut *mut GsLocationMap) -> GsStatus {
    if bytes.is_null() || out.is_null() {
        return GsStatus::NullPointer;
    }
    guard(|| match decode_stamp(std::slice::from_raw_parts(bytes, len)) {
        Ok(m) => {
            *out = boxed(GsLocationMap { inner: m });
            GsStatus::Ok
        }
        Err(e) => fail(GsStatus::DataError, e),
    })
}

/// # Safety
/// `map` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_map_free(map: *mut GsLocationMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Matches the map against `cat` and fits the sender position, without
/// correcting for elapsed time.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gs_locate_sender(
    map: *const GsLocationMap,
    cat: *const GsCatalog,
    match_tol_kpc: f64,
    out: *mut GsVec3,
) -> GsStatus {
    let (Some(map), Some(cat), false) = (map.as_ref(), cat.as_ref(), out.is_null()) else {
        return GsStatus::NullPointer;
    };
    guard(|| {
        let fp = FrameParams::default();
        let corr = match match_anchors(&map.inner, &cat.inner, &fp, match_tol_kpc) {
            Ok(c) => c,
            Err(e) => return fail(GsStatus::NumericalError, e),
        };
        match locate_sender(&corr, &map.inner, &cat.inner, &fp) {
            Ok(fix) => {
                let p = fix.position;
                *out = GsVec3 { x: p.x, y: p.y, z: p.z };
                GsStatus::Ok
            }
            Err(e) => fail(GsStatus::NumericalError, e),
        }
    })
}

/// Recovers the elapsed time between the map and `cat` within
/// `[window_lo_myr, window_hi_myr]`, using straight-line motion.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn gs_recover_epoch(
    map: *const GsLocationMap,
    cat: *const GsCatalog,
    window_lo_myr: f64,
    window_hi_myr: f64,
    out: *mut GsEpochEstimate,
) -> GsStatus {
    let (Some(map), Some(cat), false) = (map.as_ref(), cat.as_ref(), out.is_null()) else {
        return GsStatus::NullPointer;
    };
    guard(|| {
        let opts = RecoverOptions {
            window_lo_myr,
            window_hi_myr,
            ..RecoverOptions::default()
        };
        match recover_epoch(&map.inner, &cat.inner, &FrameParams::default(), &opts) {
            Ok(est) => {
                let p = est.sender_position;
                *out = GsEpochEstimate {
                    dt_myr: est.dt_myr,
                    residual_kpc: est.residual_kpc,
                    bound_myr: est.bound_myr,
                    sender: GsVec3 { x: p.x, y: p.y, z: p.z },
                };
                GsStatus::Ok
            }
            Err(e) => fail(GsStatus::NumericalError, e),
        }
    })
}
