//! C ABI over the `pucs` solver.
//!
//! Problems and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`PucsStatus`]; on failure, [`pucs_last_error_message`] describes the error
//! for the calling thread. Orbit indices `r` are 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pucs::io::{parse_problem, solve_report_json, ProblemFile};
use pucs::{Error, OrbitState, OrbitStatus, SolveReport, SolverConfig};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PucsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    DimensionMismatch = 5,
    UnsupportedSampling = 6,
    BudgetExceeded = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PucsOrbitStatus {
    Active = 0,
    Pruned = 1,
    Converged = 2,
    InconsistentStall = 3,
    Exhausted = 4,
}

impl From<OrbitStatus> for PucsOrbitStatus {
    fn from(s: OrbitStatus) -> Self {
        match s {
            OrbitStatus::Active => PucsOrbitStatus::Active,
            OrbitStatus::Pruned => PucsOrbitStatus::Pruned,
            OrbitStatus::Converged => PucsOrbitStatus::Converged,
            OrbitStatus::InconsistentStall => PucsOrbitStatus::InconsistentStall,
            OrbitStatus::Exhausted => PucsOrbitStatus::Exhausted,
        }
    }
}

/// Solver settings. Start from `pucs_solver_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PucsSolverConfig {
    pub eps_residual: f64,
    pub max_sweeps: usize,
    pub tie_tol: f64,
    pub stall_window: usize,
    pub feasibility_tol: f64,
}

impl From<PucsSolverConfig> for SolverConfig {
    fn from(c: PucsSolverConfig) -> Self {
        SolverConfig {
            eps_residual: c.eps_residual,
            max_sweeps: c.max_sweeps,
            tie_tol: c.tie_tol,
            stall_window: c.stall_window,
            feasibility_tol: c.feasibility_tol,
            ..SolverConfig::default()
        }
    }
}

/// A parsed problem file.
pub struct PucsProblem {
    file: ProblemFile,
}

/// The outcome of one solver run.
pub struct PucsReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(status: PucsStatus, message: impl Into<String>) -> PucsStatus {
    set_last_error(message.into());
    status
}

fn status_of(err: &Error) -> PucsStatus {
    match err.root() {
        Error::DimensionMismatch { .. } => PucsStatus::DimensionMismatch,
        Error::Validation(_) => PucsStatus::Validation,
        Error::UnsupportedSampling(_) => PucsStatus::UnsupportedSampling,
        Error::BudgetExceeded { .. } => PucsStatus::BudgetExceeded,
        Error::Parse { .. } => PucsStatus::Parse,
        Error::Io { .. } => PucsStatus::Io,
        Error::Located { .. } => unreachable!("root strips locations"),
    }
}

fn from_error(err: Error) -> PucsStatus {
    fail(status_of(&err), err.to_string())
}

fn guard<F: FnOnce() -> PucsStatus>(f: F) -> PucsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(PucsStatus::Panic, "internal panic"))
}

fn orbit<'a>(report: *const PucsReport, r: usize) -> Result<&'a OrbitState, PucsStatus> {
    // SAFETY: the caller passes a handle obtained from `pucs_solve` and not yet freed.
    let report = unsafe { report.as_ref() }
        .ok_or_else(|| fail(PucsStatus::NullPointer, "report is null"))?;
    if r == 0 || r > report.report.orbits.len() {
        return Err(fail(
            PucsStatus::OutOfRange,
            format!("orbit {r} out of range 1..={}", report.report.orbits.len()),
        ));
    }
    Ok(&report.report.orbits[r - 1])
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pucs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// Parses a nul-terminated problem file. On success `*out` receives a new handle.
///
/// # Safety
/// `text` must be null or a valid nul-terminated string; `out` must be null
/// or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_parse(
    text: *const c_char,
    out: *mut *mut PucsProblem,
) -> PucsStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(
                PucsStatus::NullPointer,
                "null argument to pucs_problem_parse",
            );
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(PucsStatus::InvalidUtf8, "problem text is not UTF-8");
        };
        match parse_problem(text) {
            Ok(file) => {
                *out = Box::into_raw(Box::new(PucsProblem { file }));
                PucsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a problem handle. Null is ignored.
///
/// # Safety
/// `problem` must be null or a handle from `pucs_problem_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_free(problem: *mut PucsProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Space dimension, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_dimension(problem: *const PucsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.file.problem.dimension())
}

/// Number of sets, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_set_count(problem: *const PucsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.file.problem.set_count())
}

/// Number of pieces in set `set` (1-based), or 0 when out of range.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_piece_count(
    problem: *const PucsProblem,
    set: usize,
) -> usize {
    match problem.as_ref() {
        Some(p) if set >= 1 && set <= p.file.problem.set_count() => p.file.problem.set(set).len(),
        _ => 0,
    }
}

/// Number of disjointness warnings raised while parsing.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_problem_warning_count(problem: *const PucsProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.file.warnings.len())
}

#[no_mangle]
pub extern "C" fn pucs_solver_config_default() -> PucsSolverConfig {
    let d = SolverConfig::default();
    PucsSolverConfig {
        eps_residual: d.eps_residual,
        max_sweeps: d.max_sweeps,
        tie_tol: d.tie_tol,
        stall_window: d.stall_window,
        feasibility_tol: d.feasibility_tol,
    }
}

/// Runs the solver using the problem's own initial points. A null `config`
/// means defaults. On success `*out` receives a new report handle.
///
/// # Safety
/// `problem` must be a live handle, `config` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pucs_solve(
    problem: *const PucsProblem,
    config: *const PucsSolverConfig,
    out: *mut *mut PucsReport,
) -> PucsStatus {
    guard(|| {
        let Some(problem) = problem.as_ref() else {
            return fail(PucsStatus::NullPointer, "problem is null");
        };
        if out.is_null() {
            return fail(PucsStatus::NullPointer, "out is null");
        }
        let config: SolverConfig = config
            .as_ref()
            .map_or_else(SolverConfig::default, |c| (*c).into());
        match pucs::solve(&problem.file.problem, &config, &problem.file.initial_points) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(PucsReport { report }));
                PucsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a report handle. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle from `pucs_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_free(report: *mut PucsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of orbits (pieces of the first set), or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_orbit_count(report: *const PucsReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.orbits.len())
}

/// Number of converged orbits, or 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_solution_count(report: *const PucsReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.solutions.len())
}

/// # Safety
/// `report` must be a live handle and `status` writable.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_orbit_status(
    report: *const PucsReport,
    r: usize,
    status: *mut PucsOrbitStatus,
) -> PucsStatus {
    guard(|| {
        if status.is_null() {
            return fail(PucsStatus::NullPointer, "status is null");
        }
        match orbit(report, r) {
            Ok(o) => {
                *status = o.status.into();
                PucsStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Copies the final iterate of orbit `r` into `coords`, which must hold
/// exactly `len` = dimension values.
///
/// # Safety
/// `report` must be a live handle and `coords` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_orbit_point(
    report: *const PucsReport,
    r: usize,
    coords: *mut f64,
    len: usize,
) -> PucsStatus {
    guard(|| {
        if coords.is_null() {
            return fail(PucsStatus::NullPointer, "coords is null");
        }
        let o = match orbit(report, r) {
            Ok(o) => o,
            Err(s) => return s,
        };
        if len != o.current.dim() {
            return fail(
                PucsStatus::DimensionMismatch,
                format!("buffer holds {len} values, point has {}", o.current.dim()),
            );
        }
        ptr::copy_nonoverlapping(o.current.as_ptr(), coords, len);
        PucsStatus::Ok
    })
}

/// Residual of the last sweep of orbit `r`.
///
/// # Safety
/// `report` must be a live handle and `residual` writable.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_orbit_residual(
    report: *const PucsReport,
    r: usize,
    residual: *mut f64,
) -> PucsStatus {
    guard(|| {
        if residual.is_null() {
            return fail(PucsStatus::NullPointer, "residual is null");
        }
        match orbit(report, r) {
            Ok(o) => {
                *residual = o.last_sweep_residual;
                PucsStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Sweeps performed by orbit `r` after the pruning sweep.
///
/// # Safety
/// `report` must be a live handle and `sweeps` writable.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_orbit_sweeps(
    report: *const PucsReport,
    r: usize,
    sweeps: *mut usize,
) -> PucsStatus {
    guard(|| {
        if sweeps.is_null() {
            return fail(PucsStatus::NullPointer, "sweeps is null");
        }
        match orbit(report, r) {
            Ok(o) => {
                *sweeps = o.sweeps;
                PucsStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// The full report as JSON, or null for a null handle. Release with
/// `pucs_string_free`.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pucs_report_to_json(report: *const PucsReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => {
            CString::new(solve_report_json(&r.report)).map_or(ptr::null_mut(), CString::into_raw)
        }
        None => ptr::null_mut(),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from `pucs_report_to_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pucs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
