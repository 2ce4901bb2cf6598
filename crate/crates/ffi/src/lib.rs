//! C interface. A recommender handle wraps a trained model and its bins;
//! pairs go in and results come out as JSON strings in the corpus and
//! `recommend` formats.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use boxvis::boxmodel::Model;
use boxvis::corpus::PairRecord;
use boxvis::discretizer::DiscretizationMap;
use boxvis::error::Error;
use boxvis::explain::explain;
use boxvis::features::FeatureRegistry;
use boxvis::inference::{recommend, InferenceOptions};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxvisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidData = 5,
    FingerprintMismatch = 6,
    Panic = 7,
}

/// Opaque recommender.
pub struct BoxvisRecommender {
    model: Model,
    bins: DiscretizationMap,
    options: InferenceOptions,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BoxvisStatus, message: impl Into<String>) -> BoxvisStatus {
    set_error(message.into());
    status
}

fn status_of(e: &Error) -> BoxvisStatus {
    match e {
        Error::Io { .. } => BoxvisStatus::Io,
        Error::Json(_) | Error::Schema { .. } => BoxvisStatus::Parse,
        Error::FingerprintMismatch { .. } => BoxvisStatus::FingerprintMismatch,
        _ => BoxvisStatus::InvalidData,
    }
}

fn from_error(e: Error) -> BoxvisStatus {
    fail(status_of(&e), e.to_string())
}

/// Runs `f`, turning a panic into `Panic`.
fn guard(f: impl FnOnce() -> BoxvisStatus) -> BoxvisStatus {
    catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| fail(BoxvisStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, BoxvisStatus> {
    if p.is_null() {
        return Err(fail(BoxvisStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BoxvisStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

/// Loads a model and the bins it was trained against.
///
/// # Safety
/// `model_path` and `bins_path` must be NUL-terminated strings and `out`
/// a valid pointer. On success `*out` owns a handle to release with
/// `boxvis_recommender_free`.
#[no_mangle]
pub unsafe extern "C" fn boxvis_recommender_open(
    model_path: *const c_char,
    bins_path: *const c_char,
    out: *mut *mut BoxvisRecommender,
) -> BoxvisStatus {
    guard(|| {
        if out.is_null() {
            return fail(BoxvisStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let (model_path, bins_path) = match (
            str_arg(model_path, "model_path"),
            str_arg(bins_path, "bins_path"),
        ) {
            (Ok(m), Ok(b)) => (m, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let bins = match DiscretizationMap::load(Path::new(bins_path)) {
            Ok(b) => b,
            Err(e) => return from_error(e),
        };
        let model = match Model::load_checked(Path::new(model_path), &bins) {
            Ok(m) => m,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(BoxvisRecommender {
            model,
            bins,
            options: InferenceOptions::default(),
        }));
        BoxvisStatus::Ok
    })
}

/// Sets the containment tolerance used for the recommended type set.
///
/// # Safety
/// `handle` must come from `boxvis_recommender_open`.
#[no_mangle]
pub unsafe extern "C" fn boxvis_recommender_set_tolerance(
    handle: *mut BoxvisRecommender,
    tol: f64,
) -> BoxvisStatus {
    let Some(h) = handle.as_mut() else {
        return fail(BoxvisStatus::NullPointer, "handle is null");
    };
    if tol.is_nan() || tol < 0.0 {
        return fail(BoxvisStatus::InvalidData, "tolerance must be non-negative");
    }
    h.options.containment_tol = tol;
    BoxvisStatus::Ok
}

/// Recommends axes and chart types for one pair given as a corpus JSON
/// line. `*out_json` receives the result, freed with `boxvis_string_free`.
///
/// # Safety
/// `handle` must come from `boxvis_recommender_open`, `pair_json` must be
/// a NUL-terminated string and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn boxvis_recommend(
    handle: *const BoxvisRecommender,
    pair_json: *const c_char,
    out_json: *mut *mut c_char,
) -> BoxvisStatus {
    guard(|| {
        if out_json.is_null() {
            return fail(BoxvisStatus::NullPointer, "out_json is null");
        }
        *out_json = ptr::null_mut();
        let Some(h) = handle.as_ref() else {
            return fail(BoxvisStatus::NullPointer, "handle is null");
        };
        let text = match str_arg(pair_json, "pair_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let record: PairRecord = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => return fail(BoxvisStatus::Parse, e.to_string()),
        };
        let result = record
            .into_pair()
            .and_then(|pair| recommend(&pair, &h.model, &h.bins, &h.options));
        let rec = match result {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        let exp = explain(&rec, FeatureRegistry::builtin());
        let value = serde_json::json!({
            "id": rec.id,
            "axes": rec.axes,
            "ranking": rec.ranking,
            "contained": rec.contained,
            "recommended": rec.recommended,
            "ranked_fallback": rec.ranked_fallback,
            "explanation": exp,
        });
        let s = CString::new(value.to_string()).expect("JSON has no interior NUL");
        *out_json = s.into_raw();
        BoxvisStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from `boxvis_recommender_open` and not be used again.
#[no_mangle]
pub unsafe extern "C" fn boxvis_recommender_free(handle: *mut BoxvisRecommender) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn boxvis_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn boxvis_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn boxvis_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
