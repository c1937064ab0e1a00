//! C ABI over the `hgeo` solver.
//!
//! Problems and reports are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`HgeoStatus`]; on failure [`hgeo_last_error`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hgeo::report::{parse_config, run_solve, to_json_pretty, ProblemConfig, RunReport};
use hgeo::solvers::RayCount;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgeoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    SolverError = 4,
    OutOfRange = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Audit outcome. `count` is `-1` when a continuum of rays was found.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HgeoAudit {
    pub count: i64,
    pub required_minimum: usize,
    pub pass: bool,
    pub signature_p: usize,
    pub signature_q: usize,
    pub signature_k: usize,
}

/// A parsed and validated problem configuration.
pub struct HgeoProblem {
    config: ProblemConfig,
}

/// The result of [`hgeo_solve`].
pub struct HgeoReport {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    let c = CString::new(msg).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: HgeoStatus, msg: impl Into<String>) -> HgeoStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> HgeoStatus) -> HgeoStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(HgeoStatus::Panic, "internal panic"))
}

/// Message for the most recent failure on the calling thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hgeo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hgeo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML configuration into a new problem handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgeo_problem_from_toml(
    text: *const c_char,
    out: *mut *mut HgeoProblem,
) -> HgeoStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(HgeoStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(HgeoStatus::InvalidUtf8, "configuration is not UTF-8");
        };
        match parse_config(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(HgeoProblem { config }));
                HgeoStatus::Ok
            }
            Err(e) => fail(HgeoStatus::ConfigError, e.to_string()),
        }
    })
}

/// # Safety
/// `problem` must come from [`hgeo_problem_from_toml`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hgeo_problem_free(problem: *mut HgeoProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Overrides the random seed and the number of multistart directions
/// (`starts = 0` keeps the configured value).
///
/// # Safety
/// `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hgeo_problem_set_seed(
    problem: *mut HgeoProblem,
    rng_seed: u64,
    starts: usize,
) -> HgeoStatus {
    guard(|| {
        let Some(p) = problem.as_mut() else {
            return fail(HgeoStatus::NullPointer, "null problem");
        };
        p.config.solve.rng_seed = rng_seed;
        if starts > 0 {
            p.config.solve.seeds = starts;
        }
        HgeoStatus::Ok
    })
}

/// Dimension of `m`, i.e. the length of every ray vector; 0 for null.
///
/// # Safety
/// `problem` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hgeo_problem_dim(problem: *const HgeoProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.config.randers.dim())
}

/// Runs the full enumeration and audit.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgeo_solve(problem: *const HgeoProblem, out: *mut *mut HgeoReport) -> HgeoStatus {
    guard(|| {
        let (Some(p), false) = (problem.as_ref(), out.is_null()) else {
            return fail(HgeoStatus::NullPointer, "null argument");
        };
        *out = ptr::null_mut();
        match run_solve(&p.config) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(HgeoReport { report }));
                HgeoStatus::Ok
            }
            Err(e) => fail(HgeoStatus::SolverError, e.to_string()),
        }
    })
}

/// # Safety
/// `report` must come from [`hgeo_solve`] and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_free(report: *mut HgeoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of distinct rays in the report; 0 for null.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_ray_count(report: *const HgeoReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.rays.len())
}

/// Whether the rays form a continuum; false for null.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_continuum(report: *const HgeoReport) -> bool {
    report.as_ref().is_some_and(|r| r.report.continuum_detected)
}

/// Copies ray `index` (normalized to `F = 1`) into `y[0..len]`. `len` must
/// equal [`hgeo_problem_dim`]. `residual` and `lambda` may be null.
///
/// # Safety
/// `report` must be a live handle and `y` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_ray(
    report: *const HgeoReport,
    index: usize,
    y: *mut f64,
    len: usize,
    residual: *mut f64,
    lambda: *mut f64,
) -> HgeoStatus {
    guard(|| {
        let (Some(r), false) = (report.as_ref(), y.is_null()) else {
            return fail(HgeoStatus::NullPointer, "null argument");
        };
        let Some(ray) = r.report.rays.get(index) else {
            return fail(
                HgeoStatus::OutOfRange,
                format!("ray {index} of {}", r.report.rays.len()),
            );
        };
        if len < ray.y.y.len() {
            return fail(
                HgeoStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", ray.y.y.len()),
            );
        }
        std::slice::from_raw_parts_mut(y, ray.y.y.len()).copy_from_slice(&ray.y.y);
        if let Some(res) = residual.as_mut() {
            *res = ray.residual_norm;
        }
        if let Some(l) = lambda.as_mut() {
            *l = ray.lambda;
        }
        HgeoStatus::Ok
    })
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_audit(report: *const HgeoReport, out: *mut HgeoAudit) -> HgeoStatus {
    guard(|| {
        let (Some(r), Some(out)) = (report.as_ref(), out.as_mut()) else {
            return fail(HgeoStatus::NullPointer, "null argument");
        };
        let a = &r.report.audit;
        *out = HgeoAudit {
            count: match a.count {
                RayCount::Finite(n) => n as i64,
                RayCount::Infinite => -1,
            },
            required_minimum: a.required_minimum,
            pass: a.pass,
            signature_p: a.signature.p,
            signature_q: a.signature.q,
            signature_k: a.signature.k,
        };
        HgeoStatus::Ok
    })
}

/// The full report as JSON. Release with [`hgeo_string_free`]; null on
/// failure.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hgeo_report_json(report: *const HgeoReport) -> *mut c_char {
    let mut out = ptr::null_mut();
    let status = guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(HgeoStatus::NullPointer, "null report");
        };
        match to_json_pretty(&r.report).map(CString::new) {
            Ok(Ok(s)) => {
                out = s.into_raw();
                HgeoStatus::Ok
            }
            _ => fail(HgeoStatus::SolverError, "could not serialize the report"),
        }
    });
    if status == HgeoStatus::Ok {
        out
    } else {
        ptr::null_mut()
    }
}

/// # Safety
/// `s` must come from [`hgeo_report_json`] and not be used afterwards. Null
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn hgeo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
