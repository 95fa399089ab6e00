//! C ABI over `superposition`. Bases and states are opaque heap handles
//! released with their `*_free` function; every fallible call returns an
//! [`SpStatus`] and leaves a message for [`sp_last_error_message`].
//!
//! Matrices cross the boundary as separate real and imaginary arrays of
//! length `d*d` in column-major order; a null imaginary array means zero.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use superposition::basis::{build_basis, constant_overlap_basis, gram_determinant};
use superposition::measures::{MeasureId, RoofOptions};
use superposition::qstate::rho_x;
use superposition::{CMat, Complex64, DensityMatrix, Error, SuperpositionBasis};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    LinearlyDependent = 3,
    NoConvergence = 4,
    UnknownMeasure = 5,
    Panic = 6,
}

/// Opaque basis handle.
pub struct SpBasis {
    inner: SuperpositionBasis,
}

/// Opaque density-matrix handle.
pub struct SpState {
    inner: DensityMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::LinearlyDependent { .. } => SpStatus::LinearlyDependent,
        Error::UnknownMeasure(_) => SpStatus::UnknownMeasure,
        e if e.is_numerical() => SpStatus::NoConvergence,
        _ => SpStatus::InvalidInput,
    }
}

struct Failure(SpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SpStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {message}"));
            SpStatus::Panic
        }
    }
}

/// # Safety
/// `re` (and `im` unless null) must point to `d*d` doubles.
unsafe fn read_matrix(d: usize, re: *const f64, im: *const f64) -> Result<CMat, Failure> {
    if re.is_null() {
        return Err(null("real part"));
    }
    if d == 0 || d > 64 {
        return Err(Failure(SpStatus::InvalidInput, format!("dimension {d} outside 1..=64")));
    }
    let n = d * d;
    let re = std::slice::from_raw_parts(re, n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n)) };
    Ok(CMat::from_iterator(d, d, (0..n).map(|k| Complex64::new(re[k], im.map_or(0.0, |v| v[k])))))
}

fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

fn measure_of(name: *const c_char) -> Result<MeasureId, Failure> {
    if name.is_null() {
        return Err(null("measure name"));
    }
    let text = unsafe { CStr::from_ptr(name) }
        .to_str()
        .map_err(|_| Failure(SpStatus::InvalidInput, "measure name is not UTF-8".into()))?;
    Ok(text.parse()?)
}

fn evaluate(
    state: *const SpState,
    basis: *const SpBasis,
    name: *const c_char,
    seed: u64,
) -> Result<superposition::MeasureResult, Failure> {
    let state = unsafe { state.as_ref() }.ok_or_else(|| null("state"))?;
    let basis = unsafe { basis.as_ref() }.ok_or_else(|| null("basis"))?;
    let measure = measure_of(name)?;
    Ok(measure.evaluate(&state.inner, &basis.inner, &RoofOptions::default().with_seed(seed))?)
}

/// Constant-overlap basis `⟨c_i|c_j⟩ = mu` of dimension `d`.
#[no_mangle]
pub extern "C" fn sp_basis_constant_overlap(d: usize, mu: f64, out: *mut *mut SpBasis) -> SpStatus {
    guard(|| write_out(out, SpBasis { inner: constant_overlap_basis(d, mu)? }))
}

/// Basis from the columns of a `d × d` matrix.
///
/// # Safety
/// See the module notes on matrix arrays.
#[no_mangle]
pub unsafe extern "C" fn sp_basis_from_columns(
    d: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut SpBasis,
) -> SpStatus {
    guard(|| {
        let m = unsafe { read_matrix(d, re, im)? };
        write_out(out, SpBasis { inner: build_basis(m)? })
    })
}

/// # Safety
/// `basis` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_basis_free(basis: *mut SpBasis) {
    if !basis.is_null() {
        drop(unsafe { Box::from_raw(basis) });
    }
}

/// # Safety
/// `basis` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn sp_basis_gram_determinant(basis: *const SpBasis, out: *mut f64) -> SpStatus {
    guard(|| {
        let basis = unsafe { basis.as_ref() }.ok_or_else(|| null("basis"))?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        unsafe { *out = gram_determinant(&basis.inner) };
        Ok(())
    })
}

/// Density matrix from a `d × d` matrix (validated: Hermitian, unit trace, PSD).
///
/// # Safety
/// See the module notes on matrix arrays.
#[no_mangle]
pub unsafe extern "C" fn sp_state_from_matrix(
    d: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut SpState,
) -> SpStatus {
    guard(|| {
        let m = unsafe { read_matrix(d, re, im)? };
        write_out(out, SpState { inner: DensityMatrix::new(m)? })
    })
}

/// `ρ(x)` and its qubit basis with overlap `mu`.
#[no_mangle]
pub extern "C" fn sp_state_rho_x(
    x: f64,
    mu: f64,
    out_state: *mut *mut SpState,
    out_basis: *mut *mut SpBasis,
) -> SpStatus {
    guard(|| {
        if out_state.is_null() || out_basis.is_null() {
            return Err(null("output pointer"));
        }
        let (rho, basis) = rho_x(x, mu)?;
        write_out(out_state, SpState { inner: rho })?;
        write_out(out_basis, SpBasis { inner: basis })
    })
}

/// # Safety
/// `state` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_state_free(state: *mut SpState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Value of the named measure (`l1`, `rel_ent`, `robustness`, `weight`,
/// `delta`, `l1_roof`, `rel_ent_roof`, `rank`).
///
/// # Safety
/// Handles must be live; `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_measure(
    state: *const SpState,
    basis: *const SpBasis,
    name: *const c_char,
    seed: u64,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let result = evaluate(state, basis, name, seed)?;
        unsafe { *out = result.value };
        Ok(())
    })
}

/// Full result `{value, certificate, converged, iterations}` as JSON. The
/// string is released with [`sp_string_free`].
///
/// # Safety
/// Handles must be live; `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sp_measure_json(
    state: *const SpState,
    basis: *const SpBasis,
    name: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let result = evaluate(state, basis, name, seed)?;
        let text = serde_json::to_string(&result).map_err(|e| Failure(SpStatus::InvalidInput, e.to_string()))?;
        let text = CString::new(text).map_err(|e| Failure(SpStatus::InvalidInput, e.to_string()))?;
        unsafe { *out = text.into_raw() };
        Ok(())
    })
}

/// # Safety
/// `s` must come from [`sp_measure_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Message of the last failed call on this thread (empty after a success).
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
