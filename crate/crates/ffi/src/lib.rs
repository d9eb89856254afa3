//! C interface to the weingarten solver.
//!
//! Handles are opaque and owned by the caller; each `*_free` accepts
//! NULL. Every fallible call returns a [`WwStatus`] and, on failure,
//! leaves a message retrievable with [`ww_last_error_message`] on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use weingarten::cli;
use weingarten::config::RunConfig;
use weingarten::curvature::CurvatureSpec;
use weingarten::error::{exit, Error};
use weingarten::problem::HomotopyProblem;
use weingarten::solver;

/// Status codes. Values below 20 equal the exit codes of the command-line
/// tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WwStatus {
    Ok = 0,
    Config = 2,
    Validation = 3,
    Gauge = 4,
    Bisect = 5,
    Domain = 6,
    Io = 7,
    NewtonStall = 10,
    ContinuationStall = 11,
    BarrierViolation = 12,
    Cone = 13,
    NullPointer = 20,
    BufferTooSmall = 21,
    InvalidUtf8 = 22,
    Panic = 23,
}

impl WwStatus {
    fn from_error(e: &Error) -> Self {
        match e.exit_code() {
            exit::CONFIG => Self::Config,
            exit::VALIDATION => Self::Validation,
            exit::GAUGE => Self::Gauge,
            exit::BISECT => Self::Bisect,
            exit::DOMAIN => Self::Domain,
            exit::IO => Self::Io,
            exit::NEWTON_STALL => Self::NewtonStall,
            exit::CONTINUATION_STALL => Self::ContinuationStall,
            exit::BARRIER_VIOLATION => Self::BarrierViolation,
            exit::CONE => Self::Cone,
            _ => Self::Config,
        }
    }
}

/// A configured homotopy problem.
pub struct WwProblem {
    config: RunConfig,
    problem: HomotopyProblem,
}

/// Final height field and its continuation report.
pub struct WwSolution {
    values: Vec<f64>,
    residual: f64,
    steps: usize,
    newton_total: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs removed"));
}

fn guard(f: impl FnOnce() -> WwStatus) -> WwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            WwStatus::Panic
        }
    }
}

fn fail(e: Error) -> WwStatus {
    let status = WwStatus::from_error(&e);
    set_error(e.to_string());
    status
}

/// Message describing the most recent failure on this thread, or an empty
/// string. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn ww_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ww_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a configuration (TOML, or JSON when `is_json` is nonzero) and
/// builds the validated homotopy problem.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ww_problem_from_config(
    text: *const c_char,
    is_json: c_int,
    out: *mut *mut WwProblem,
) -> WwStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            set_error("null pointer argument");
            return WwStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            set_error("configuration is not valid UTF-8");
            return WwStatus::InvalidUtf8;
        };
        let parsed = if is_json != 0 {
            RunConfig::from_json_str(text)
        } else {
            RunConfig::from_toml_str(text)
        };
        match parsed.and_then(|config| {
            let problem = config.problem()?;
            Ok(WwProblem { config, problem })
        }) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(p));
                WwStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `problem` must be NULL or a handle from [`ww_problem_from_config`] not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn ww_problem_free(problem: *mut WwProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of grid nodes, or 0 for NULL.
///
/// # Safety
/// `problem` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ww_problem_nodes(problem: *const WwProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.grid().len())
}

/// Runs the continuation from `s = 0` to `s = 1`.
///
/// # Safety
/// `problem` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ww_solve(problem: *const WwProblem, out: *mut *mut WwSolution) -> WwStatus {
    guard(|| {
        if problem.is_null() || out.is_null() {
            set_error("null pointer argument");
            return WwStatus::NullPointer;
        }
        *out = ptr::null_mut();
        let p = &*problem;
        match solver::continuation(&p.problem, &p.config.solver) {
            Ok((z, report)) => {
                let sol = WwSolution {
                    residual: report.final_step().map_or(f64::NAN, |s| s.residual),
                    steps: report.steps.len(),
                    newton_total: report.newton_total(),
                    values: z.into_values(),
                };
                *out = Box::into_raw(Box::new(sol));
                WwStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs every verification check; `passed` receives 1 when all pass.
///
/// # Safety
/// `problem` must be a live handle and `passed` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ww_verify(problem: *const WwProblem, passed: *mut c_int) -> WwStatus {
    guard(|| {
        if problem.is_null() || passed.is_null() {
            set_error("null pointer argument");
            return WwStatus::NullPointer;
        }
        match cli::cmd_verify(&(*problem).config) {
            Ok(table) => {
                *passed = c_int::from(table.all_pass());
                if !table.all_pass() {
                    let names: Vec<&str> = table.failed().iter().map(|r| r.name.as_str()).collect();
                    set_error(format!("failed checks: {}", names.join("; ")));
                }
                WwStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of nodes in the solution, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_len(solution: *const WwSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.values.len())
}

/// Copies the heights into `buf`, which must hold `len` doubles with
/// `len >= ww_solution_len(solution)`.
///
/// # Safety
/// `solution` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_copy(solution: *const WwSolution, buf: *mut f64, len: usize) -> WwStatus {
    guard(|| {
        if solution.is_null() || buf.is_null() {
            set_error("null pointer argument");
            return WwStatus::NullPointer;
        }
        let values = &(*solution).values;
        if len < values.len() {
            set_error(format!("buffer holds {len} values, need {}", values.len()));
            return WwStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        WwStatus::Ok
    })
}

/// Final residual sup-norm, or NaN for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_residual(solution: *const WwSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.residual)
}

/// Accepted continuation states including `s = 0`, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_steps(solution: *const WwSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.steps)
}

/// Newton iterations summed over all states, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_newton_total(solution: *const WwSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.newton_total)
}

/// # Safety
/// `solution` must be NULL or a handle from [`ww_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ww_solution_free(solution: *mut WwSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Normalized curvature function `(S_r / C(n, r))^(1/r)` of the `n`
/// values at `lambda`.
///
/// # Safety
/// `lambda` must be valid for `n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ww_curvature_f(n: usize, r: usize, lambda: *const f64, out: *mut f64) -> WwStatus {
    guard(|| {
        if lambda.is_null() || out.is_null() {
            set_error("null pointer argument");
            return WwStatus::NullPointer;
        }
        let lam = std::slice::from_raw_parts(lambda, n);
        match CurvatureSpec::new(n, r).and_then(|s| s.f_eval(lam)) {
            Ok(f) => {
                *out = f;
                WwStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
