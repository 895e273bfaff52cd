use std::ffi::{CStr, CString};
use std::ptr;

use gl2modp_ffi::*;

fn field(p: u32, n: u32) -> *mut Gl2Field {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { gl2_field_new(p, n, &mut f) }, Gl2Status::Ok);
    f
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gl2_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn field_arithmetic_in_f4() {
    let f = field(2, 2);
    let mut out = 0;
    unsafe {
        assert_eq!(gl2_field_q(f), 4);
        assert_eq!(gl2_field_add(f, 2, 3, &mut out), Gl2Status::Ok);
        assert_eq!(out, 1);
        assert_eq!(gl2_field_mul(f, 2, 2, &mut out), Gl2Status::Ok);
        assert_eq!(out, 3);
        assert_eq!(gl2_field_inv(f, 2, &mut out), Gl2Status::Ok);
        assert_eq!(out, 3);
        assert_eq!(gl2_field_inv(f, 0, &mut out), Gl2Status::InvalidArgument);
        assert_eq!(gl2_field_mul(f, 4, 1, &mut out), Gl2Status::InvalidArgument);
        gl2_field_free(f);
    }
}

#[test]
fn bad_field_and_null_pointers() {
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(gl2_field_new(6, 1, &mut f), Gl2Status::InvalidArgument);
        assert!(last_error().contains("not prime"));
        assert!(f.is_null());
        assert_eq!(gl2_field_new(3, 1, ptr::null_mut()), Gl2Status::NullPointer);
        assert_eq!(gl2_field_q(ptr::null()), 0);
        assert_eq!(gl2_hmodule_dim(ptr::null()), 0);
        assert!(gl2_hmodule_to_json(ptr::null()).is_null());
        assert_eq!(gl2_hmodule_check_relations(ptr::null()), Gl2Status::NullPointer);
        gl2_field_free(ptr::null_mut());
        gl2_hmodule_free(ptr::null_mut());
        gl2_string_free(ptr::null_mut());
    }
}

#[test]
fn modules_over_f5() {
    let f = field(5, 1);
    let (mut m1, mut m2, mut l, mut bad) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    let mut iso = true;
    unsafe {
        assert_eq!(gl2_hmodule_make_m_gamma(f, 1, 0, 1, &mut m1), Gl2Status::Ok);
        assert_eq!(gl2_hmodule_make_m_gamma(f, 2, 0, 1, &mut m2), Gl2Status::Ok);
        assert_eq!(gl2_hmodule_make_l_gamma(f, 1, 0, 1, &mut l), Gl2Status::Ok);
        assert_eq!(gl2_hmodule_make_l_gamma(f, 1, 1, 1, &mut bad), Gl2Status::InvalidArgument);
        assert_eq!(gl2_hmodule_dim(m1), 2);
        assert_eq!(gl2_hmodule_dim(l), 4);
        assert_eq!(gl2_hmodule_check_relations(m1), Gl2Status::Ok);
        assert_eq!(gl2_hmodule_check_relations(l), Gl2Status::Ok);
        assert_eq!(gl2_hmodule_is_isomorphic(m1, m2, &mut iso), Gl2Status::Ok);
        assert!(!iso);
        assert_eq!(gl2_hmodule_is_isomorphic(m1, m1, &mut iso), Gl2Status::Ok);
        assert!(iso);
        let js = gl2_hmodule_to_json(m1);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(js).to_str().unwrap()).unwrap();
        assert_eq!(v["dim"], 2);
        gl2_string_free(js);
        for m in [m1, m2, l] {
            gl2_hmodule_free(m);
        }
        gl2_field_free(f);
    }
}

#[test]
fn isomorphism_needs_one_field() {
    let (f3, f5) = (field(3, 1), field(5, 1));
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    let mut iso = false;
    unsafe {
        gl2_hmodule_make_m_gamma(f3, 0, 0, 1, &mut a);
        gl2_hmodule_make_m_gamma(f5, 0, 0, 1, &mut b);
        assert_eq!(gl2_hmodule_is_isomorphic(a, b, &mut iso), Gl2Status::InvalidArgument);
        gl2_hmodule_free(a);
        gl2_hmodule_free(b);
        gl2_field_free(f3);
        gl2_field_free(f5);
    }
}

#[test]
fn run_command_returns_report() {
    let cmd = CString::new("irreps").unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(gl2_run_command(cmd.as_ptr(), 3, 1, 0, false, &mut out), Gl2Status::Ok);
        let v: serde_json::Value = serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        gl2_string_free(out);
        assert_eq!(v["schema"], "v1");
        assert_eq!(v["data"]["labels"].as_array().unwrap().len(), 6);
        let bad = CString::new("nope").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(gl2_run_command(bad.as_ptr(), 3, 1, 0, false, &mut none), Gl2Status::InvalidArgument);
        assert!(none.is_null());
        assert!(last_error().contains("unknown command"));
    }
}
