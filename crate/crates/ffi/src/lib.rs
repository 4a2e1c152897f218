//! C interface to the cutrank solver.
//!
//! Every fallible function returns one of the `CR_*` status codes and writes
//! its result through an out pointer. On failure the message is available
//! from [`cr_last_error_message`] until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use cutrank::bnc::{solve_mip, BncConfig, FeedbackMode, SolveStatus};
use cutrank::features::{CutFeatures, NUM_FEATURES};
use cutrank::model::{self, MipInstance};
use cutrank::scorer::{self, MlpParams, SelectionPolicy};
use cutrank::Error;

pub const CR_OK: c_int = 0;
pub const CR_ERR_NULL: c_int = -1;
pub const CR_ERR_IO: c_int = -2;
pub const CR_ERR_PARSE: c_int = -3;
pub const CR_ERR_INVALID: c_int = -4;
pub const CR_ERR_NUMERICAL: c_int = -5;
pub const CR_ERR_INFEASIBLE: c_int = -6;
pub const CR_ERR_UNBOUNDED: c_int = -7;
pub const CR_ERR_PANIC: c_int = -99;

pub const CR_POLICY_NONE: c_int = 0;
pub const CR_POLICY_RANDOM: c_int = 1;
pub const CR_POLICY_VIOLATION: c_int = 2;
pub const CR_POLICY_NORM_VIOLATION: c_int = 3;
pub const CR_POLICY_DISTANCE: c_int = 4;
pub const CR_POLICY_PARALLELISM: c_int = 5;
pub const CR_POLICY_CUT_RANKING: c_int = 6;

pub const CR_STATUS_OPTIMAL: c_int = 0;
pub const CR_STATUS_FEASIBLE: c_int = 1;
pub const CR_STATUS_INFEASIBLE: c_int = 2;

pub const CR_NUM_FEATURES: usize = 14;
const _: () = assert!(CR_NUM_FEATURES == NUM_FEATURES);

/// Opaque MIP instance.
pub struct CrInstance(MipInstance);

/// Opaque trained scoring model.
pub struct CrModel(MlpParams);

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CrSolveOptions {
    /// One of the `CR_POLICY_*` constants.
    pub policy: c_int,
    pub k_percent: f64,
    pub node_limit: u64,
    /// Seconds.
    pub time_limit: f64,
    pub seed: u64,
    /// Nonzero selects wall-clock feedback; zero keeps runs deterministic.
    pub wall_clock: c_int,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct CrSolveReport {
    /// One of the `CR_STATUS_*` constants.
    pub status: c_int,
    pub limit_hit: c_int,
    /// NaN when no incumbent was found.
    pub objective: f64,
    pub nodes_visited: u64,
    pub simplex_iterations: u64,
    /// NaN unless wall-clock feedback was requested.
    pub wall_time: f64,
    pub cuts_generated: u64,
    pub cuts_added: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_for(err: &Error) -> c_int {
    match err {
        Error::Io { .. } => CR_ERR_IO,
        Error::Parse { .. } => CR_ERR_PARSE,
        Error::NumericalFailure(_) | Error::Diverged(_) => CR_ERR_NUMERICAL,
        Error::Infeasible => CR_ERR_INFEASIBLE,
        Error::Unbounded => CR_ERR_UNBOUNDED,
        _ => CR_ERR_INVALID,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (c_int, String)>) -> c_int {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CR_OK,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            CR_ERR_PANIC
        }
    }
}

fn lift<T>(r: cutrank::Result<T>) -> Result<T, (c_int, String)> {
    r.map_err(|e| (code_for(&e), e.to_string()))
}

fn null(what: &str) -> (c_int, String) {
    (CR_ERR_NULL, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (c_int, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (CR_ERR_INVALID, "path is not valid UTF-8".to_string()))?;
    Ok(PathBuf::from(s))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), (c_int, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `cr_*` call on the same thread.
#[no_mangle]
pub extern "C" fn cr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_read(path: *const c_char, out: *mut *mut CrInstance) -> c_int {
    guard(|| {
        let path = path_arg(path)?;
        let inst = lift(model::read_instance(path))?;
        emit(out, CrInstance(inst))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_generate_knapsack(
    n_items: usize,
    max_number: u32,
    max_value: u32,
    max_weight: u32,
    seed: u64,
    out: *mut *mut CrInstance,
) -> c_int {
    guard(|| {
        let inst = lift(model::generate_knapsack(n_items, max_number, max_value, max_weight, seed))?;
        emit(out, CrInstance(inst))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_generate_set_cover(
    n_elements: usize,
    n_sets: usize,
    density: f64,
    seed: u64,
    out: *mut *mut CrInstance,
) -> c_int {
    guard(|| {
        let inst = lift(model::generate_set_cover(n_elements, n_sets, density, seed))?;
        emit(out, CrInstance(inst))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_generate_planning(
    n_factories: usize,
    n_demands: usize,
    seed: u64,
    out: *mut *mut CrInstance,
) -> c_int {
    guard(|| {
        let inst = lift(model::generate_planning(n_factories, n_demands, seed))?;
        emit(out, CrInstance(inst))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_generate_general(
    n_vars: usize,
    n_cons: usize,
    seed: u64,
    out: *mut *mut CrInstance,
) -> c_int {
    guard(|| {
        let inst = lift(model::generate_general_mip(n_vars, n_cons, seed))?;
        emit(out, CrInstance(inst))
    })
}

/// # Safety
/// `inst` must come from a `cr_instance_*` constructor and `path` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_write(inst: *const CrInstance, path: *const c_char) -> c_int {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let path = path_arg(path)?;
        lift(model::write_instance(&inst.0, path))
    })
}

/// # Safety
/// `inst` must come from a `cr_instance_*` constructor; the out pointers may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_size(
    inst: *const CrInstance,
    rows: *mut usize,
    cols: *mut usize,
) -> c_int {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let (m, n) = inst.0.size();
        if !rows.is_null() {
            *rows = m;
        }
        if !cols.is_null() {
            *cols = n;
        }
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or come from a `cr_instance_*` constructor, and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cr_instance_free(inst: *mut CrInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cr_model_load(path: *const c_char, out: *mut *mut CrModel) -> c_int {
    guard(|| {
        let path = path_arg(path)?;
        let params = lift(scorer::load_model(path))?;
        emit(out, CrModel(params))
    })
}

/// Positive-class probability for one raw 14-value feature vector.
///
/// # Safety
/// `features` must point to `len` doubles and `score` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cr_model_score(
    model: *const CrModel,
    features: *const f64,
    len: usize,
    score: *mut f64,
) -> c_int {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if features.is_null() {
            return Err(null("features"));
        }
        if score.is_null() {
            return Err(null("score"));
        }
        if len != NUM_FEATURES {
            return Err((CR_ERR_INVALID, format!("expected {NUM_FEATURES} features, got {len}")));
        }
        let mut arr = [0.0; NUM_FEATURES];
        arr.copy_from_slice(std::slice::from_raw_parts(features, len));
        *score = model.0.score(&CutFeatures::from_array(arr));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from [`cr_model_load`], and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn cr_model_free(model: *mut CrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub extern "C" fn cr_solve_options_default() -> CrSolveOptions {
    let d = BncConfig::default();
    CrSolveOptions {
        policy: CR_POLICY_VIOLATION,
        k_percent: d.k_percent,
        node_limit: d.node_limit,
        time_limit: d.time_limit,
        seed: d.seed,
        wall_clock: 0,
    }
}

/// Solve with root cuts chosen by `opts.policy`. `model` is only read for
/// `CR_POLICY_CUT_RANKING`. When `x` is non-null and an incumbent exists,
/// its first `min(x_len, n)` entries are copied out.
///
/// # Safety
/// Handles must come from their constructors, `opts` and `report` must be
/// valid, and `x` must be null or point to `x_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cr_solve(
    inst: *const CrInstance,
    model: *const CrModel,
    opts: *const CrSolveOptions,
    report: *mut CrSolveReport,
    x: *mut f64,
    x_len: usize,
) -> c_int {
    guard(|| {
        let inst = inst.as_ref().ok_or_else(|| null("instance"))?;
        let opts = opts.as_ref().ok_or_else(|| null("options"))?;
        if report.is_null() {
            return Err(null("report"));
        }
        let policy = match opts.policy {
            CR_POLICY_NONE | CR_POLICY_VIOLATION => SelectionPolicy::Violation,
            CR_POLICY_RANDOM => SelectionPolicy::Random(opts.seed),
            CR_POLICY_NORM_VIOLATION => SelectionPolicy::NormViolation,
            CR_POLICY_DISTANCE => SelectionPolicy::Distance,
            CR_POLICY_PARALLELISM => SelectionPolicy::Parallelism,
            CR_POLICY_CUT_RANKING => {
                let m = model.as_ref().ok_or_else(|| null("model"))?;
                SelectionPolicy::CutRanking(m.0.clone())
            }
            p => return Err((CR_ERR_INVALID, format!("unknown policy code {p}"))),
        };
        let cfg = BncConfig {
            policy,
            k_percent: if opts.policy == CR_POLICY_NONE { 0.0 } else { opts.k_percent },
            node_limit: opts.node_limit,
            time_limit: opts.time_limit,
            feedback_mode: if opts.wall_clock != 0 {
                FeedbackMode::WallClock
            } else {
                FeedbackMode::DeterministicWork
            },
            seed: opts.seed,
            ..BncConfig::default()
        };
        let r = lift(solve_mip(&inst.0, &cfg))?;
        *report = CrSolveReport {
            status: match r.status {
                SolveStatus::Optimal => CR_STATUS_OPTIMAL,
                SolveStatus::Feasible => CR_STATUS_FEASIBLE,
                SolveStatus::Infeasible => CR_STATUS_INFEASIBLE,
            },
            limit_hit: r.limit_hit as c_int,
            objective: r.objective.unwrap_or(f64::NAN),
            nodes_visited: r.nodes_visited,
            simplex_iterations: r.simplex_iterations,
            wall_time: r.wall_time.unwrap_or(f64::NAN),
            cuts_generated: r.cuts_generated as u64,
            cuts_added: r.cuts_added as u64,
        };
        if let (false, Some(sol)) = (x.is_null(), r.x.as_ref()) {
            let n = x_len.min(sol.len());
            std::slice::from_raw_parts_mut(x, n).copy_from_slice(&sol[..n]);
        }
        Ok(())
    })
}
