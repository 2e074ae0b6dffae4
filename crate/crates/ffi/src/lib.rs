//! C ABI for the streaming predictors: opaque handles, integer error
//! codes, and a thread-local last-error message.
//!
//! The generated header lives in `include/streampred.h`; regenerate with
//! `cbindgen --config cbindgen.toml --crate streampred-ffi --output include/streampred.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use streampred::harness::{ExperimentConfig, Method, PredictorHandle};
use streampred::Error;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    SpOk = 0,
    SpInvalidArgument = 1,
    SpColdStart = 2,
    SpNumericalError = 3,
    SpUnsupported = 4,
    SpNullPointer = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SpStatus {
    match err {
        Error::ColdStart => SpStatus::SpColdStart,
        Error::Numerical(_) | Error::InvalidPosterior(_) | Error::DegenerateMoments
        | Error::DegenerateBias => SpStatus::SpNumericalError,
        _ => SpStatus::SpInvalidArgument,
    }
}

/// Opaque one-pass predictor.
pub struct SpPredictor {
    inner: PredictorHandle,
}

/// Last error message for this thread, or NULL if none. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Create a one-pass predictor.
///
/// `method` is one of "hbp_mean", "hbp_median", "shtarkov", "dpp".
/// `m` and `big_m` bound the sketch support (`m < big_m`); `k`, `depth`,
/// `width` size the sketch; `seed` fixes the hash rows. On success writes
/// the handle to `out` and returns `SpOk`.
///
/// # Safety
/// `method` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_predictor_new(
    method: *const c_char,
    m: f64,
    big_m: f64,
    k: usize,
    depth: usize,
    width: usize,
    seed: u64,
    out: *mut *mut SpPredictor,
) -> SpStatus {
    if method.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return SpStatus::SpNullPointer;
    }
    let name = match CStr::from_ptr(method).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("method name is not valid UTF-8".into());
            return SpStatus::SpInvalidArgument;
        }
    };
    let parsed = match Method::parse(name) {
        Ok(p) => p,
        Err(e) => {
            set_error(e.to_string());
            return SpStatus::SpInvalidArgument;
        }
    };
    if !parsed.one_pass_capable() {
        set_error(format!("{name} cannot run one-pass"));
        return SpStatus::SpUnsupported;
    }
    let config = ExperimentConfig {
        k_intervals: k,
        depth,
        width,
        seed,
        ..ExperimentConfig::default()
    };
    if let Err(e) = config.validate() {
        set_error(e.to_string());
        return SpStatus::SpInvalidArgument;
    }
    if !(m < big_m && m.is_finite() && big_m.is_finite()) {
        set_error(format!("need finite m < big_m, got ({m}, {big_m})"));
        return SpStatus::SpInvalidArgument;
    }
    match PredictorHandle::new_one_pass(parsed, &config, m, big_m) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(SpPredictor { inner }));
            SpStatus::SpOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Feed one observation.
///
/// # Safety
/// `p` must be a live handle from `sp_predictor_new`.
#[no_mangle]
pub unsafe extern "C" fn sp_predictor_observe(p: *mut SpPredictor, y: f64) -> SpStatus {
    let Some(p) = p.as_mut() else {
        set_error("null handle".into());
        return SpStatus::SpNullPointer;
    };
    match p.inner.observe(y) {
        Ok(()) => SpStatus::SpOk,
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Current point prediction, written to `out`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_predictor_predict(p: *const SpPredictor, out: *mut f64) -> SpStatus {
    let Some(p) = p.as_ref() else {
        set_error("null handle".into());
        return SpStatus::SpNullPointer;
    };
    if out.is_null() {
        set_error("null output pointer".into());
        return SpStatus::SpNullPointer;
    }
    match p.inner.predict() {
        Ok(v) => {
            *out = v;
            SpStatus::SpOk
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Destroy a handle. NULL is a no-op.
///
/// # Safety
/// `p` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sp_predictor_free(p: *mut SpPredictor) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
