//! C ABI over the detector.
//!
//! Images, configs and results are opaque heap handles owned by the caller
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`TdStatus`]; on failure a description is available from
//! [`td_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use textdet::pipeline::{detect, DetectionResult, PipelineConfig};
use textdet::raster::{decode_image, GrayImage};
use textdet::region::BoundingBox;
use textdet::report::{parse_config, result_json};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DecodeError = 3,
    ConfigError = 4,
    OutOfRange = 5,
    NotFound = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TdBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

impl From<BoundingBox> for TdBox {
    fn from(b: BoundingBox) -> Self {
        Self { x: b.x, y: b.y, width: b.width, height: b.height }
    }
}

/// Opaque gray image.
pub struct TdImage(GrayImage);

/// Opaque pipeline configuration.
pub struct TdConfig(PipelineConfig);

/// Opaque detection result.
pub struct TdResult(DetectionResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: TdStatus, msg: impl Into<String>) -> TdStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> TdStatus) -> TdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(TdStatus::Panic, "internal panic"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message describing the last failure on this thread; empty if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn td_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn td_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies a row-major 8-bit gray raster.
///
/// # Safety
/// `data` must point to `width * height` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_image_from_gray(data: *const u8, width: u32, height: u32, out: *mut *mut TdImage) -> TdStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(TdStatus::NullPointer, "data and out must not be null");
        }
        let len = width as usize * height as usize;
        let pixels = std::slice::from_raw_parts(data, len).to_vec();
        match GrayImage::new(width, height, pixels) {
            Ok(img) => {
                store(out, TdImage(img));
                TdStatus::Ok
            }
            Err(e) => fail(TdStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Decodes a PNG or binary PGM byte stream.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_image_decode(bytes: *const u8, len: usize, out: *mut *mut TdImage) -> TdStatus {
    guard(|| {
        if bytes.is_null() || out.is_null() {
            return fail(TdStatus::NullPointer, "bytes and out must not be null");
        }
        match decode_image(std::slice::from_raw_parts(bytes, len)) {
            Ok(img) => {
                store(out, TdImage(img));
                TdStatus::Ok
            }
            Err(e) => fail(TdStatus::DecodeError, e.to_string()),
        }
    })
}

/// # Safety
/// `image` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_image_width(image: *const TdImage) -> u32 {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `image` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_image_height(image: *const TdImage) -> u32 {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// # Safety
/// `image` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_image_free(image: *mut TdImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// A config holding the built-in defaults.
#[no_mangle]
pub extern "C" fn td_config_default() -> *mut TdConfig {
    Box::into_raw(Box::new(TdConfig(PipelineConfig::default())))
}

/// Parses a JSON config; missing keys take defaults, unknown keys fail.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn td_config_from_json(json: *const c_char, out: *mut *mut TdConfig) -> TdStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(TdStatus::NullPointer, "json and out must not be null");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(TdStatus::InvalidArgument, "config is not valid UTF-8");
        };
        match parse_config(text) {
            Ok(config) => {
                store(out, TdConfig(config));
                TdStatus::Ok
            }
            Err(e) => fail(TdStatus::ConfigError, e.to_string()),
        }
    })
}

/// # Safety
/// `config` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_config_free(config: *mut TdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs detection. A null `config` uses the defaults.
///
/// # Safety
/// `image` must be a live handle, `config` a live handle or null, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn td_detect(image: *const TdImage, config: *const TdConfig, out: *mut *mut TdResult) -> TdStatus {
    guard(|| {
        let (Some(image), false) = (image.as_ref(), out.is_null()) else {
            return fail(TdStatus::NullPointer, "image and out must not be null");
        };
        let default;
        let config = match config.as_ref() {
            Some(c) => &c.0,
            None => {
                default = PipelineConfig::default();
                &default
            }
        };
        store(out, TdResult(detect(&image.0, config)));
        TdStatus::Ok
    })
}

/// Number of merged text boxes; 0 for a null handle.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn td_result_box_count(result: *const TdResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.final_boxes().len())
}

/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn td_result_box(result: *const TdResult, index: usize, out: *mut TdBox) -> TdStatus {
    guard(|| {
        let (Some(result), false) = (result.as_ref(), out.is_null()) else {
            return fail(TdStatus::NullPointer, "result and out must not be null");
        };
        match result.0.final_boxes().get(index) {
            Some(&b) => {
                *out = b.into();
                TdStatus::Ok
            }
            None => fail(TdStatus::OutOfRange, format!("box index {index} out of range")),
        }
    })
}

/// Writes the primary (largest) text box, or returns `NotFound` when nothing was detected.
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn td_result_primary_box(result: *const TdResult, out: *mut TdBox) -> TdStatus {
    guard(|| {
        let (Some(result), false) = (result.as_ref(), out.is_null()) else {
            return fail(TdStatus::NullPointer, "result and out must not be null");
        };
        match result.0.primary_box() {
            Some(b) => {
                *out = b.into();
                TdStatus::Ok
            }
            None => fail(TdStatus::NotFound, "no text region detected"),
        }
    })
}

/// Full result document as JSON. Release the string with [`td_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn td_result_json(result: *const TdResult, out: *mut *mut c_char) -> TdStatus {
    guard(|| {
        let (Some(result), false) = (result.as_ref(), out.is_null()) else {
            return fail(TdStatus::NullPointer, "result and out must not be null");
        };
        *out = CString::new(result_json(&result.0)).map_or(ptr::null_mut(), CString::into_raw);
        TdStatus::Ok
    })
}

/// # Safety
/// `result` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_result_free(result: *mut TdResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be a string returned by this library, not yet freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn td_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
