//! C ABI over the `bridgeham` library.
//!
//! Every fallible call returns a [`BhStatus`]. On failure the message is kept
//! per thread and can be read with [`bh_last_error_message`]. Trials are
//! handed out as opaque [`BhTrial`] pointers and must be released with
//! [`bh_trial_free`]. Strings returned through `char **` belong to the caller
//! and are released with [`bh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bridgeham::error::Error;
use bridgeham::experiment::{self, Mode, TrialConfig, TrialOutcome};
use bridgeham::params::{ModelParams, ParamsReport};
use bridgeham::sampling::Point;

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BhStatus {
    Ok = 0,
    /// A required pointer was null or a buffer was too small.
    InvalidArgument = 1,
    InvalidParams = 2,
    InvalidInput = 3,
    Precondition = 4,
    Internal = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BhMode {
    Strict = 0,
    BestEffort = 1,
}

/// Model inputs. The density is uniform; custom point sets go through
/// [`bh_trial_run_points`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BhParams {
    pub n: usize,
    pub alpha: f64,
    pub omega: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub l: usize,
    pub m: usize,
}

/// Derived tiling quantities.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BhTiling {
    pub k: usize,
    pub m_eff: usize,
    pub r_n: f64,
    pub t_n: f64,
    pub gamma_n: f64,
    pub theta_n: f64,
    pub budget: f64,
}

/// Event flags and result of one trial.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BhEvents {
    pub f: bool,
    pub i: bool,
    pub j: bool,
    pub h: bool,
    pub success: bool,
    pub out_of_guarantee: bool,
}

/// Opaque trial handle.
pub struct BhTrial {
    outcome: TrialOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(BhStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParams(_) | Error::InvalidDensity(_) => BhStatus::InvalidParams,
            Error::InvalidInput(_) => BhStatus::InvalidInput,
            Error::Precondition(_) => BhStatus::Precondition,
            Error::Internal(_) => BhStatus::Internal,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => BhStatus::Io,
        };
        Fail(code, e.to_string())
    }
}

fn null_arg(name: &str) -> Fail {
    Fail(BhStatus::InvalidArgument, format!("{name} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BhStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BhStatus::Panic
        }
    }
}

fn model(p: &BhParams) -> ModelParams {
    ModelParams { n: p.n, alpha: p.alpha, omega: p.omega, eps1: p.eps1, eps2: p.eps2, l: p.l, m: p.m }
}

fn config(p: *const BhParams, mode: BhMode) -> Result<TrialConfig, Fail> {
    let p = unsafe { p.as_ref() }.ok_or_else(|| null_arg("params"))?;
    let params = model(p);
    params.validate()?;
    let mode = match mode {
        BhMode::Strict => Mode::Strict,
        BhMode::BestEffort => Mode::BestEffort,
    };
    Ok(TrialConfig::uniform(params, mode))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s).map(CString::into_raw).map_err(|e| Fail(BhStatus::Internal, e.to_string()))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Fail> {
    serde_json::to_string(v).map_err(|e| Fail::from(Error::from(e)))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn bh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Computes the tiling for `params` into `out`.
///
/// # Safety
/// `params` and `out` must be null or valid for reads and writes respectively.
#[no_mangle]
pub unsafe extern "C" fn bh_params_compute(params: *const BhParams, out: *mut BhTiling) -> BhStatus {
    guard(|| {
        let p = unsafe { params.as_ref() }.ok_or_else(|| null_arg("params"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        let mp = model(p);
        mp.validate()?;
        let r = ParamsReport::compute(&mp)?;
        *out = BhTiling {
            k: r.k,
            m_eff: r.m_eff,
            r_n: r.r_n,
            t_n: r.t_n,
            gamma_n: r.gamma_n,
            theta_n: r.theta_n,
            budget: r.budget_effective,
        };
        Ok(())
    })
}

/// Samples `params.n` uniform nodes with `seed` and runs one trial.
///
/// # Safety
/// `params` must be null or valid for reads. `out` must be null or valid for
/// writes. On success `*out` holds a handle to release with `bh_trial_free`.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_run(
    params: *const BhParams,
    mode: BhMode,
    seed: u64,
    out: *mut *mut BhTrial,
) -> BhStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        *out = ptr::null_mut();
        let cfg = config(params, mode)?;
        let outcome = experiment::run_trial_detailed(&cfg, seed)?;
        *out = Box::into_raw(Box::new(BhTrial { outcome }));
        Ok(())
    })
}

/// Runs one trial on `n_points` points given as interleaved `x, y` pairs in
/// the centred unit square. `params.n` must equal `n_points`.
///
/// # Safety
/// `xy` must be valid for reads of `2 * n_points` doubles. Other pointers as
/// for `bh_trial_run`.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_run_points(
    params: *const BhParams,
    mode: BhMode,
    xy: *const f64,
    n_points: usize,
    seed: u64,
    out: *mut *mut BhTrial,
) -> BhStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        *out = ptr::null_mut();
        let cfg = config(params, mode)?;
        if xy.is_null() && n_points > 0 {
            return Err(null_arg("xy"));
        }
        let coords = if n_points == 0 { &[][..] } else { unsafe { std::slice::from_raw_parts(xy, 2 * n_points) } };
        let points = coords.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect();
        let outcome = experiment::run_trial_on_points(&cfg, points, seed)?;
        *out = Box::into_raw(Box::new(BhTrial { outcome }));
        Ok(())
    })
}

/// Releases a trial handle. Null is ignored.
///
/// # Safety
/// `trial` must be null or a handle from this library not yet released.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_free(trial: *mut BhTrial) {
    if !trial.is_null() {
        drop(unsafe { Box::from_raw(trial) });
    }
}

/// Copies the event flags of `trial` into `out`.
///
/// # Safety
/// `trial` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_events(trial: *const BhTrial, out: *mut BhEvents) -> BhStatus {
    guard(|| {
        let t = unsafe { trial.as_ref() }.ok_or_else(|| null_arg("trial"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        let r = &t.outcome.report;
        *out = BhEvents {
            f: r.events.f,
            i: r.events.i,
            j: r.events.j,
            h: r.events.h,
            success: r.success,
            out_of_guarantee: r.out_of_guarantee,
        };
        Ok(())
    })
}

/// Number of nodes in the trial's cycle, or 0 if none was built or `trial`
/// is null.
///
/// # Safety
/// `trial` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_cycle_len(trial: *const BhTrial) -> usize {
    unsafe { trial.as_ref() }.and_then(|t| t.outcome.construction.as_ref()).map_or(0, |c| c.order.len())
}

/// Copies the cycle's node order into `buf`, which must hold at least
/// `bh_trial_cycle_len(trial)` entries.
///
/// # Safety
/// `buf` must be valid for writes of `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_cycle(trial: *const BhTrial, buf: *mut usize, cap: usize) -> BhStatus {
    guard(|| {
        let t = unsafe { trial.as_ref() }.ok_or_else(|| null_arg("trial"))?;
        let order = t.outcome.construction.as_ref().map_or(&[][..], |c| c.order.as_slice());
        if order.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null_arg("buf"));
        }
        if cap < order.len() {
            return Err(Fail(BhStatus::InvalidArgument, format!("buffer holds {cap} entries, need {}", order.len())));
        }
        unsafe { ptr::copy_nonoverlapping(order.as_ptr(), buf, order.len()) };
        Ok(())
    })
}

/// Writes the trial report as a JSON string to `*out`.
///
/// # Safety
/// `trial` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bh_trial_report_json(trial: *const BhTrial, out: *mut *mut c_char) -> BhStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        *out = ptr::null_mut();
        let t = unsafe { trial.as_ref() }.ok_or_else(|| null_arg("trial"))?;
        *out = to_c_string(json(&t.outcome.report)?)?;
        Ok(())
    })
}

/// Runs `trials` seeded trials (seeds `base_seed`, `base_seed + 1`, ...) on
/// `jobs` threads, 0 meaning all cores, and writes the summary JSON to `*out`.
///
/// # Safety
/// `params` must be null or readable; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn bh_batch_run(
    params: *const BhParams,
    mode: BhMode,
    trials: usize,
    base_seed: u64,
    jobs: usize,
    out: *mut *mut c_char,
) -> BhStatus {
    guard(|| {
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("out"))?;
        *out = ptr::null_mut();
        let cfg = config(params, mode)?;
        let summary = experiment::run_batch(&cfg, trials, base_seed, jobs)?;
        *out = to_c_string(json(&summary)?)?;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet released.
#[no_mangle]
pub unsafe extern "C" fn bh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
