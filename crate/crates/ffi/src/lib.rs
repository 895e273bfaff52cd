//! C ABI over `gl2modp`. Objects are opaque heap handles released by their
//! `_free` function; strings returned to C are released by `gl2_string_free`.
//! Every fallible call returns a `Gl2Status` and records a message readable
//! through `gl2_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gl2modp::cli::{self, RunConfig};
use gl2modp::gamma::TorusChar;
use gl2modp::hecke::{make_l_gamma, make_m_gamma, module_iso, CharOrbit, HModule};
use gl2modp::{Error, Field, Fq};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gl2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ChecksFailed = 3,
    Internal = 4,
}

pub struct Gl2Field(Field);

pub struct Gl2HModule(HModule);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: Gl2Status, msg: &str) -> Gl2Status {
    set_error(msg);
    status
}

fn from_error(e: Error) -> Gl2Status {
    fail(Gl2Status::InvalidArgument, &e.to_string())
}

fn guard(body: impl FnOnce() -> Gl2Status) -> Gl2Status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => fail(Gl2Status::Internal, "panic inside gl2modp"),
    }
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failing call on this thread; owned by the library
/// and valid until the next call that fails.
#[no_mangle]
pub extern "C" fn gl2_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates F_q with q = p^n.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_new(p: u32, n: u32, out: *mut *mut Gl2Field) -> Gl2Status {
    guard(|| {
        if out.is_null() {
            return fail(Gl2Status::NullPointer, "out is null");
        }
        match Field::new(p, n) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(Gl2Field(f)));
                Gl2Status::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `f` must be null or a handle from `gl2_field_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_free(f: *mut Gl2Field) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Field size, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_q(f: *const Gl2Field) -> u32 {
    f.as_ref().map_or(0, |f| f.0.q())
}

/// Elements are encoded as integers 0..q-1 by their F_p-coordinates in base p.
///
/// # Safety
/// `f` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_mul(f: *const Gl2Field, a: u32, b: u32, out: *mut u32) -> Gl2Status {
    binary_op(f, a, b, out, |f, x, y| Ok(f.mul(x, y)))
}

/// # Safety
/// `f` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_add(f: *const Gl2Field, a: u32, b: u32, out: *mut u32) -> Gl2Status {
    binary_op(f, a, b, out, |f, x, y| Ok(f.add(x, y)))
}

/// # Safety
/// `f` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_field_inv(f: *const Gl2Field, a: u32, out: *mut u32) -> Gl2Status {
    binary_op(f, a, 0, out, |f, x, _| f.inv(x))
}

unsafe fn binary_op(
    f: *const Gl2Field,
    a: u32,
    b: u32,
    out: *mut u32,
    op: impl FnOnce(&Field, Fq, Fq) -> gl2modp::Result<Fq>,
) -> Gl2Status {
    guard(|| {
        let (Some(f), false) = (f.as_ref(), out.is_null()) else {
            return fail(Gl2Status::NullPointer, "null argument");
        };
        let (x, y) = match (element(&f.0, a), element(&f.0, b)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match op(&f.0, x, y) {
            Ok(z) => {
                *out = z.0 as u32;
                Gl2Status::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

fn element(f: &Field, a: u32) -> Result<Fq, Gl2Status> {
    if a >= f.q() {
        return Err(fail(Gl2Status::InvalidArgument, &format!("{a} is not an element of F_{}", f.q())));
    }
    Ok(Fq(a as u8))
}

unsafe fn make_module(
    f: *const Gl2Field,
    c: i64,
    d: i64,
    lambda: u32,
    out: *mut *mut Gl2HModule,
    build: fn(&Field, CharOrbit, Fq) -> gl2modp::Result<HModule>,
) -> Gl2Status {
    guard(|| {
        let (Some(f), false) = (f.as_ref(), out.is_null()) else {
            return fail(Gl2Status::NullPointer, "null argument");
        };
        let lambda = match element(&f.0, lambda) {
            Ok(x) => x,
            Err(s) => return s,
        };
        let gamma = CharOrbit::new(TorusChar::new(&f.0, c, d));
        match build(&f.0, gamma, lambda) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(Gl2HModule(m)));
                Gl2Status::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// The supersingular module for the orbit of χ(diag(g^i, g^j)) = g^{c i + d j},
/// with T_Π^2 acting by `lambda`.
///
/// # Safety
/// `f` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_make_m_gamma(
    f: *const Gl2Field,
    c: i64,
    d: i64,
    lambda: u32,
    out: *mut *mut Gl2HModule,
) -> Gl2Status {
    make_module(f, c, d, lambda, out, make_m_gamma)
}

/// The two-dimensional module for a regular orbit; fails for χ = χ^s.
///
/// # Safety
/// `f` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_make_l_gamma(
    f: *const Gl2Field,
    c: i64,
    d: i64,
    lambda: u32,
    out: *mut *mut Gl2HModule,
) -> Gl2Status {
    make_module(f, c, d, lambda, out, make_l_gamma)
}

/// # Safety
/// `m` must be null or a live module handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_free(m: *mut Gl2HModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live module handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_dim(m: *const Gl2HModule) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim)
}

/// Audits the defining relations; returns `ChecksFailed` naming the first
/// violated relation.
///
/// # Safety
/// `m` must be a live module handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_check_relations(m: *const Gl2HModule) -> Gl2Status {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return fail(Gl2Status::NullPointer, "null module");
        };
        match m.0.check_relations().first_failure() {
            None => Gl2Status::Ok,
            Some(name) => fail(Gl2Status::ChecksFailed, name),
        }
    })
}

/// # Safety
/// `a` and `b` must be live module handles over the same field and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_is_isomorphic(
    a: *const Gl2HModule,
    b: *const Gl2HModule,
    out: *mut bool,
) -> Gl2Status {
    guard(|| {
        let (Some(a), Some(b), false) = (a.as_ref(), b.as_ref(), out.is_null()) else {
            return fail(Gl2Status::NullPointer, "null argument");
        };
        if a.0.field != b.0.field {
            return fail(Gl2Status::InvalidArgument, "modules live over different fields");
        }
        *out = module_iso(&a.0, &b.0).is_some();
        Gl2Status::Ok
    })
}

/// JSON description of the module; free with `gl2_string_free`. Null on a null handle.
///
/// # Safety
/// `m` must be null or a live module handle.
#[no_mangle]
pub unsafe extern "C" fn gl2_hmodule_to_json(m: *const Gl2HModule) -> *mut c_char {
    match m.as_ref() {
        Some(m) => to_c_string(m.0.to_json().to_string()),
        None => ptr::null_mut(),
    }
}

/// Runs a CLI command (`irreps`, `envelopes`, `hecke`, `injmod`, `tree`,
/// `supermod`, `acceptance`) and writes its JSON report to `out`. `p = 0`
/// with `acceptance` runs every default field. Returns `ChecksFailed`, with
/// the report still written, when some check fails.
///
/// # Safety
/// `command` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl2_run_command(
    command: *const c_char,
    p: u32,
    n: u32,
    seed: u64,
    trace: bool,
    out: *mut *mut c_char,
) -> Gl2Status {
    guard(|| {
        if command.is_null() || out.is_null() {
            return fail(Gl2Status::NullPointer, "null argument");
        }
        let Ok(command) = CStr::from_ptr(command).to_str() else {
            return fail(Gl2Status::InvalidArgument, "command is not UTF-8");
        };
        let config = RunConfig {
            p: (p != 0).then_some(p),
            n,
            command: command.to_string(),
            precision: None,
            trace,
            seed,
        };
        match cli::run(&config) {
            Ok(report) => {
                *out = to_c_string(report.to_json().to_string());
                match report.first_failure() {
                    None => Gl2Status::Ok,
                    Some(name) => fail(Gl2Status::ChecksFailed, name),
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl2_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
