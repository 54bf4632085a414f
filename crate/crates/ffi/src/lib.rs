//! C ABI over the `frontlab` core.
//!
//! Every fallible function returns an [`FlStatus`]. On failure the message
//! is kept per thread and can be read with [`fl_last_error_message`].
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Strings returned by the library are released with [`fl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use frontlab::ensemble::InitSpec;
use frontlab::experiment::{self, ExperimentConfig};
use frontlab::oracle::{detailed_balance_check, generator_matrix, transient_distribution, BoundaryConvention};
use frontlab::{make_initial, ClockCollection, EngineOptions, Error, ModelKind, ModelParams, Simulation, StopReason};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    WindowTooSmall = 4,
    NoFront = 5,
    OrderViolation = 6,
    InsufficientSamples = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
    Internal = 11,
}

/// Process simulated by an [`FlSimulation`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlModel {
    Fa1f = 0,
    Tcp = 1,
}

/// Initial condition of an [`FlSimulation`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlInit {
    /// A single zero at the origin.
    Delta0 = 0,
    /// Ones on the left, a zero at the origin, Bernoulli spins on the right.
    Bernoulli = 1,
}

/// Opaque simulation handle.
pub struct FlSimulation {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> FlStatus {
    match e {
        Error::InvalidPattern(_)
        | Error::InvalidParameter(_)
        | Error::WidthMismatch(..)
        | Error::OversizeVolume(_)
        | Error::WindowDoesNotCover { .. }
        | Error::Degenerate(_)
        | Error::Json(_) => FlStatus::InvalidArgument,
        Error::NoFront => FlStatus::NoFront,
        Error::WindowTooSmall { .. } => FlStatus::WindowTooSmall,
        Error::OrderViolation { .. } => FlStatus::OrderViolation,
        Error::InsufficientSamples { .. } => FlStatus::InsufficientSamples,
        Error::Io(_) => FlStatus::Io,
    }
}

fn fail(status: FlStatus, msg: impl Into<String>) -> FlStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FlStatus>) -> FlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FlStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(FlStatus::Panic, "internal panic"),
    }
}

fn core<T>(r: frontlab::Result<T>) -> Result<T, FlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), FlStatus> {
    if p.is_null() {
        Err(fail(FlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FlStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, FlStatus> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(FlStatus::Internal, "string contains a NUL byte"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn fl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn fl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `2λ_c / (1 + 2λ_c)`.
#[no_mangle]
pub extern "C" fn fl_q_bar() -> f64 {
    frontlab::q_bar()
}

/// Creates a simulation of trajectory `run` on the window `[lo, hi]`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_new(
    model: FlModel,
    init: FlInit,
    q: f64,
    seed: u64,
    run: u64,
    lo: i64,
    hi: i64,
    out: *mut *mut FlSimulation,
) -> FlStatus {
    guard(|| {
        non_null(out, "out")?;
        let kind = match model {
            FlModel::Fa1f => ModelKind::Fa1f,
            FlModel::Tcp => ModelKind::Tcp,
        };
        let params = core(ModelParams::new(kind, q))?;
        let spec = match init {
            FlInit::Delta0 => InitSpec::Delta0,
            FlInit::Bernoulli => InitSpec::Bernoulli,
        };
        let cond = core(spec.condition(params.p, seed, run))?;
        let config = core(make_initial(&cond, lo, hi))?;
        let clocks = ClockCollection::for_run(seed, run, 0, params.p);
        let mut sim = core(Simulation::new(kind, config, clocks, 0.0, EngineOptions::default()))?;
        if kind == ModelKind::Tcp {
            sim.stop_on_extinction(0);
        }
        *out = Box::into_raw(Box::new(FlSimulation { sim }));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`fl_simulation_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_free(sim: *mut FlSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances to time `t`. `extinct` (optional) is set to 1 when a contact
/// process died before `t`, which also stops the run.
///
/// # Safety
/// `sim` must be a live handle; `extinct` may be null.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_run_until(sim: *mut FlSimulation, t: f64, extinct: *mut i32) -> FlStatus {
    guard(|| {
        non_null(sim, "sim")?;
        let s = &mut (*sim).sim;
        let stop = core(s.run_until(t, &[], &mut ()))?;
        if !extinct.is_null() {
            *extinct = matches!(stop, StopReason::Extinct { .. }) as i32;
        }
        Ok(())
    })
}

/// Current time.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_time(sim: *const FlSimulation, out: *mut f64) -> FlStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        *out = (*sim).sim.time();
        Ok(())
    })
}

/// Position of the leftmost zero; [`FlStatus::NoFront`] if there is none.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_front(sim: *const FlSimulation, out: *mut i64) -> FlStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        match (*sim).sim.front(0) {
            Some(x) => {
                *out = x;
                Ok(())
            }
            None => Err(fail(FlStatus::NoFront, "configuration has no zero")),
        }
    })
}

/// Spin at `site` (the far field outside the window).
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_spin(sim: *const FlSimulation, site: i64, out: *mut u8) -> FlStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        *out = (*sim).sim.config(0).get(site);
        Ok(())
    })
}

/// Number of clock rings processed so far.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fl_simulation_rings(sim: *const FlSimulation, out: *mut u64) -> FlStatus {
    guard(|| {
        non_null(sim, "sim")?;
        non_null(out, "out")?;
        *out = (*sim).sim.rings_processed();
        Ok(())
    })
}

/// Checks a JSON experiment config. `findings_json` receives a JSON array
/// to release with [`fl_string_free`]; `has_errors` (optional) is set to 1
/// when a finding is an error.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `findings_json`
/// writable; `has_errors` may be null.
#[no_mangle]
pub unsafe extern "C" fn fl_validate_json(
    config_json: *const c_char,
    findings_json: *mut *mut c_char,
    has_errors: *mut i32,
) -> FlStatus {
    guard(|| {
        non_null(findings_json, "findings_json")?;
        let cfg = core(ExperimentConfig::from_json(read_str(config_json, "config_json")?))?;
        let findings = experiment::validate(&cfg);
        if !has_errors.is_null() {
            *has_errors = experiment::has_errors(&findings) as i32;
        }
        let json = core(serde_json::to_string(&findings).map_err(Error::from))?;
        *findings_json = into_c_string(json)?;
        Ok(())
    })
}

/// Runs an experiment from a JSON config. When `out_dir` is not null the
/// result files are written there. `summary_json` (optional) receives the
/// summary, to release with [`fl_string_free`].
///
/// # Safety
/// String arguments must be NUL-terminated; `summary_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn fl_experiment_run_json(
    config_json: *const c_char,
    out_dir: *const c_char,
    summary_json: *mut *mut c_char,
) -> FlStatus {
    guard(|| {
        let cfg = core(ExperimentConfig::from_json(read_str(config_json, "config_json")?))?;
        let out = core(experiment::run(&cfg))?;
        if !out_dir.is_null() {
            let dir = read_str(out_dir, "out_dir")?;
            core(out.write_to(Path::new(dir)))?;
        }
        if !summary_json.is_null() {
            *summary_json = into_c_string(core(out.summary_json())?)?;
        }
        Ok(())
    })
}

/// Largest detailed-balance violation of the zero-boundary FA-1f generator
/// on `sites` sites.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fl_oracle_detailed_balance(sites: usize, q: f64, out: *mut f64) -> FlStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = core(ModelParams::fa1f(q))?;
        let g = core(generator_matrix(&params, sites, BoundaryConvention::ZeroBoundary))?;
        *out = detailed_balance_check(&g, params.p);
        Ok(())
    })
}

/// Exact law at time `t` of the zero-boundary FA-1f on `sites` sites from
/// state `initial` (bit `k` is the spin at site `k`). Writes `2^sites`
/// probabilities to `probs`, which must hold `len` values.
///
/// # Safety
/// `probs` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fl_oracle_transient(
    sites: usize,
    q: f64,
    t: f64,
    initial: usize,
    probs: *mut f64,
    len: usize,
) -> FlStatus {
    guard(|| {
        non_null(probs, "probs")?;
        let params = core(ModelParams::fa1f(q))?;
        let g = core(generator_matrix(&params, sites, BoundaryConvention::ZeroBoundary))?;
        if initial >= g.dim() {
            return Err(fail(FlStatus::InvalidArgument, format!("state {initial} out of range")));
        }
        if len < g.dim() {
            return Err(fail(
                FlStatus::BufferTooSmall,
                format!("need {} values, got {len}", g.dim()),
            ));
        }
        let d = core(transient_distribution(&g, initial, t))?;
        std::slice::from_raw_parts_mut(probs, len)[..d.probs.len()].copy_from_slice(&d.probs);
        Ok(())
    })
}
