use std::ffi::{CStr, CString};
use std::ptr;

use superposition_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sp_last_error_message()) }.to_string_lossy().into_owned()
}

fn rho_x(x: f64, mu: f64) -> (*mut SpState, *mut SpBasis) {
    let mut state = ptr::null_mut();
    let mut basis = ptr::null_mut();
    assert_eq!(sp_state_rho_x(x, mu, &mut state, &mut basis), SpStatus::Ok);
    (state, basis)
}

#[test]
fn constant_overlap_determinant() {
    let mut basis = ptr::null_mut();
    assert_eq!(sp_basis_constant_overlap(2, 0.5, &mut basis), SpStatus::Ok);
    let mut det = 0.0;
    unsafe {
        assert_eq!(sp_basis_gram_determinant(basis, &mut det), SpStatus::Ok);
        sp_basis_free(basis);
    }
    assert!((det - 0.75).abs() < 1e-12);
}

#[test]
fn inadmissible_overlap_reports_status() {
    let mut basis = ptr::null_mut();
    assert_eq!(sp_basis_constant_overlap(3, -0.5, &mut basis), SpStatus::InvalidInput);
    assert!(basis.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn columns_are_column_major() {
    // c1 = |0>, c2 = (|0> + |1>)/sqrt2
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re = [1.0, 0.0, s, s];
    let mut basis = ptr::null_mut();
    let mut det = 0.0;
    unsafe {
        assert_eq!(sp_basis_from_columns(2, re.as_ptr(), ptr::null(), &mut basis), SpStatus::Ok);
        assert_eq!(sp_basis_gram_determinant(basis, &mut det), SpStatus::Ok);
        sp_basis_free(basis);
    }
    assert!((det - 0.5).abs() < 1e-12);

    let parallel = [1.0, 0.0, 1.0, 0.0];
    let mut basis = ptr::null_mut();
    let status = unsafe { sp_basis_from_columns(2, parallel.as_ptr(), ptr::null(), &mut basis) };
    assert_eq!(status, SpStatus::LinearlyDependent);
}

#[test]
fn l1_on_rho_x() {
    let (state, basis) = rho_x(0.3, 0.25);
    let name = CString::new("l1").unwrap();
    let mut value = 0.0;
    unsafe {
        assert_eq!(sp_measure(state, basis, name.as_ptr(), 1, &mut value), SpStatus::Ok);
        sp_state_free(state);
        sp_basis_free(basis);
    }
    assert!((value - 2.0 * 0.3 / (1.0 + 2.0 * 0.25 * 0.3)).abs() < 1e-9, "{value}");
}

#[test]
fn measure_json_round_trips() {
    let (state, basis) = rho_x(-0.2, 0.5);
    let name = CString::new("robustness").unwrap();
    let mut text = ptr::null_mut();
    let json = unsafe {
        assert_eq!(sp_measure_json(state, basis, name.as_ptr(), 0, &mut text), SpStatus::Ok);
        let json = CStr::from_ptr(text).to_str().unwrap().to_owned();
        sp_string_free(text);
        sp_state_free(state);
        sp_basis_free(basis);
        json
    };
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
    assert_eq!(v["converged"], true);
}

#[test]
fn unknown_measure_and_nulls() {
    let (state, basis) = rho_x(0.1, 0.0);
    let bad = CString::new("nope").unwrap();
    let mut value = 0.0;
    unsafe {
        assert_eq!(sp_measure(state, basis, bad.as_ptr(), 0, &mut value), SpStatus::UnknownMeasure);
        assert!(last_error().contains("nope"));
        assert_eq!(sp_measure(ptr::null(), basis, bad.as_ptr(), 0, &mut value), SpStatus::NullPointer);
        assert_eq!(sp_measure(state, basis, ptr::null(), 0, &mut value), SpStatus::NullPointer);
        assert_eq!(sp_measure(state, basis, bad.as_ptr(), 0, ptr::null_mut()), SpStatus::NullPointer);
        sp_state_free(state);
        sp_basis_free(basis);
        sp_state_free(ptr::null_mut());
        sp_string_free(ptr::null_mut());
    }
}

#[test]
fn state_validation() {
    let mut state = ptr::null_mut();
    let not_unit_trace = [1.0, 0.0, 0.0, 1.0];
    let status = unsafe { sp_state_from_matrix(2, not_unit_trace.as_ptr(), ptr::null(), &mut state) };
    assert_eq!(status, SpStatus::InvalidInput);
    assert!(state.is_null());

    let re = [0.5, 0.0, 0.0, 0.5];
    let im = [0.0, 0.25, -0.25, 0.0];
    unsafe {
        assert_eq!(sp_state_from_matrix(2, re.as_ptr(), im.as_ptr(), &mut state), SpStatus::Ok);
        sp_state_free(state);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/superposition.h")).unwrap();
    for name in
        ["SP_STATUS_NO_CONVERGENCE", "typedef struct SpBasis SpBasis", "sp_measure_json", "sp_last_error_message"]
    {
        assert!(header.contains(name), "{name}");
    }
}
