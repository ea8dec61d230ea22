//! C ABI over `uplift-core`.
//!
//! Every fallible call returns an [`UpliftStatus`]; on failure the message is
//! available from [`uplift_last_error`] on the same thread. Handles are opaque
//! and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uplift_core::dataset::{load_csv, synthesize, EffectModel, Schema, SyntheticConfig};
use uplift_core::evaluation::{realized_ate, select_top};
use uplift_core::method::{IteModel, MethodSpec};
use uplift_core::{persist, Dataset, Error, Matrix};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpliftStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    UnknownMethod = 4,
    Io = 5,
    InvalidData = 6,
    DimensionMismatch = 7,
    DegenerateSelection = 8,
    Numeric = 9,
    ModelFormat = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Feature matrix with treatment and outcome labels.
pub struct UpliftDataset(Dataset);

/// Fitted ITE estimator.
pub struct UpliftModel(IteModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UpliftStatus {
    match e {
        Error::Config { .. } => UpliftStatus::Config,
        Error::UnknownMethod { .. } => UpliftStatus::UnknownMethod,
        Error::Io { .. } => UpliftStatus::Io,
        Error::DimensionMismatch { .. } => UpliftStatus::DimensionMismatch,
        Error::DegenerateSelection { .. } => UpliftStatus::DegenerateSelection,
        Error::Numeric(_) => UpliftStatus::Numeric,
        Error::ModelFormat(_) => UpliftStatus::ModelFormat,
        _ => UpliftStatus::InvalidData,
    }
}

struct Fail(UpliftStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(UpliftStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> UpliftStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UpliftStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UpliftStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(UpliftStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix_arg(p: *const f64, n_rows: usize, n_features: usize) -> Result<Matrix, Fail> {
    let len = n_rows.checked_mul(n_features).ok_or_else(|| Fail(UpliftStatus::Config, "matrix size overflows".into()))?;
    Ok(Matrix::new(n_rows, n_features, slice_arg(p, len, "features")?.to_vec())?)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uplift_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uplift_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build a dataset from a row-major `n_rows * n_features` matrix and 0/1 label arrays.
///
/// # Safety
/// Pointers must be valid for the stated lengths; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_from_arrays(
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    treatment: *const u8,
    outcome: *const u8,
    out: *mut *mut UpliftDataset,
) -> UpliftStatus {
    guard(|| {
        let x = matrix_arg(features, n_rows, n_features)?;
        let t = slice_arg(treatment, n_rows, "treatment")?;
        let y = slice_arg(outcome, n_rows, "outcome")?;
        put(out, UpliftDataset(Dataset::from_flags(x, t, y)?))
    })
}

/// Load a CSV. Null `treatment_col` / `outcome_col` default to `treatment` /
/// `conversion`; features are every other column except `visit` and `exposure`.
///
/// # Safety
/// String arguments must be NUL-terminated or null where allowed; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_load_csv(
    path: *const c_char,
    treatment_col: *const c_char,
    outcome_col: *const c_char,
    out: *mut *mut UpliftDataset,
) -> UpliftStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let mut schema = Schema::inferred();
        if !treatment_col.is_null() {
            schema.treatment = str_arg(treatment_col, "treatment_col")?.to_string();
        }
        if !outcome_col.is_null() {
            schema.outcome = str_arg(outcome_col, "outcome_col")?.to_string();
        }
        put(out, UpliftDataset(load_csv(path, &schema)?))
    })
}

/// Simulate a randomized experiment. `effect` uses the CLI shorthand, e.g.
/// `constant:0.1`, `linear:1.5` or `sign-flip:0.2`.
///
/// # Safety
/// `effect` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_synthesize(
    n_rows: usize,
    n_features: usize,
    effect: *const c_char,
    seed: u64,
    out: *mut *mut UpliftDataset,
) -> UpliftStatus {
    guard(|| {
        let effect = EffectModel::parse(str_arg(effect, "effect")?)?;
        let (ds, _) = synthesize(&SyntheticConfig::new(n_rows, n_features, effect), seed)?;
        put(out, UpliftDataset(ds))
    })
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_n_rows(ds: *const UpliftDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_n_features(ds: *const UpliftDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_features())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uplift_dataset_free(ds: *mut UpliftDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Fit method `method_id` (e.g. `2m-logit`, `uplift-rf`) with default settings.
///
/// # Safety
/// `ds` must be a live handle, `method_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_fit(
    ds: *const UpliftDataset,
    method_id: *const c_char,
    seed: u64,
    out: *mut *mut UpliftModel,
) -> UpliftStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        let spec = MethodSpec::from_id(str_arg(method_id, "method_id")?)?;
        put(out, UpliftModel(spec.fit(&ds.0, seed)?))
    })
}

/// Score `n_rows` rows of a row-major feature matrix into `scores[0..n_rows]`.
///
/// # Safety
/// `features` must hold `n_rows * n_features` values and `scores` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_predict(
    model: *const UpliftModel,
    features: *const f64,
    n_rows: usize,
    n_features: usize,
    scores: *mut f64,
) -> UpliftStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let x = matrix_arg(features, n_rows, n_features)?;
        let s = model.0.predict(&x)?.scores;
        if n_rows > 0 {
            if scores.is_null() {
                return Err(null("scores"));
            }
            ptr::copy_nonoverlapping(s.as_ptr(), scores, n_rows);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live model handle.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_n_features(model: *const UpliftModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_features())
}

/// # Safety
/// `model` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_save(model: *const UpliftModel, path: *const c_char) -> UpliftStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        persist::save(str_arg(path, "path")?, &persist::SavedModel::Ite(model.0.clone()))?;
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_load(path: *const c_char, out: *mut *mut UpliftModel) -> UpliftStatus {
    guard(|| put(out, UpliftModel(persist::load_ite(str_arg(path, "path")?)?)))
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uplift_model_free(model: *mut UpliftModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Treated minus control conversion rate over the rows in `indices`.
///
/// # Safety
/// `indices` must hold `n` values; `ate` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uplift_realized_ate(
    ds: *const UpliftDataset,
    indices: *const usize,
    n: usize,
    ate: *mut f64,
) -> UpliftStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        let idx = slice_arg(indices, n, "indices")?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= ds.0.n_rows()) {
            return Err(Fail(UpliftStatus::InvalidData, format!("index {bad} out of range for {} rows", ds.0.n_rows())));
        }
        let v = realized_ate(&ds.0, idx)?;
        if ate.is_null() {
            return Err(null("ate"));
        }
        *ate = v;
        Ok(())
    })
}

/// Indices of the top `ceil(fraction * n)` scores, highest first, ties to the
/// lower index. `*selected_len` always receives the required length; if it
/// exceeds `capacity` nothing is written and `BufferTooSmall` is returned.
///
/// # Safety
/// `scores` must hold `n` values and `selected` room for `capacity`.
#[no_mangle]
pub unsafe extern "C" fn uplift_select_top(
    scores: *const f64,
    n: usize,
    fraction: f64,
    selected: *mut usize,
    capacity: usize,
    selected_len: *mut usize,
) -> UpliftStatus {
    guard(|| {
        let top = select_top(slice_arg(scores, n, "scores")?, fraction)?;
        if selected_len.is_null() {
            return Err(null("selected_len"));
        }
        *selected_len = top.len();
        if top.len() > capacity {
            return Err(Fail(UpliftStatus::BufferTooSmall, format!("need {} slots, have {capacity}", top.len())));
        }
        if selected.is_null() {
            return Err(null("selected"));
        }
        ptr::copy_nonoverlapping(top.as_ptr(), selected, top.len());
        Ok(())
    })
}
