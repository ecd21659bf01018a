//! C ABI over `ppfxt`.
//!
//! Conventions:
//! - every fallible call returns a [`PpfxtStatus`]; results go through out-pointers;
//! - on failure the message is kept per thread, read it with [`ppfxt_last_error`];
//! - handles are opaque and released with the matching `_free` function;
//! - strings handed out by the library are freed with [`ppfxt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ppfxt::fxtbounds::{self, BoundProblem, Fraction};
use ppfxt::powmath;
use ppfxt::sim::{self, Baseline, Scenario, Trajectory};
use ppfxt::{config, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfxtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed or inconsistent scenario JSON.
    Config = 3,
    /// The tracking error left the envelope; a partial trajectory is still returned.
    EnvelopeViolation = 4,
    /// Non-finite state, failed quadrature, oracle horizon exceeded, ...
    Numeric = 5,
    /// A structural precondition of a bound does not hold (the value is not defined).
    Precondition = 6,
    Io = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PpfxtBaseline {
    Full = 0,
    ClassicalUbf = 1,
    NoPf = 2,
    Cfb = 3,
}

fn baseline_from(code: u32) -> Option<Baseline> {
    Some(match code {
        0 => Baseline::None,
        1 => Baseline::ClassicalUbf,
        2 => Baseline::NoPf,
        3 => Baseline::Cfb,
        _ => return None,
    })
}

/// Opaque scenario handle.
pub struct PpfxtScenario {
    inner: Scenario,
}

/// Opaque trajectory handle; keeps the scenario it was produced from.
pub struct PpfxtTrajectory {
    traj: Trajectory,
    scenario: Scenario,
}

/// Trajectory summary. `convergence_time` is NaN when the error never settles.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PpfxtMetrics {
    pub envelope_violations: usize,
    pub prescribed_violations: usize,
    pub max_abs_error_after_ts: f64,
    pub overshoot: f64,
    pub convergence_time: f64,
    pub control_energy: f64,
    pub peak_input: f64,
    pub final_e1: f64,
}

/// `V̇ ≤ -μ1 V^p - μ2 V^q + μ3` with `p = p_num/p_den`, `q = q_num/q_den`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PpfxtBoundProblem {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub p_num: u32,
    pub p_den: u32,
    pub q_num: u32,
    pub q_den: u32,
    pub tau: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PpfxtStatus {
    match e {
        Error::InvalidParameter { .. } | Error::Domain { .. } => PpfxtStatus::InvalidArgument,
        Error::Precondition { .. } => PpfxtStatus::Precondition,
        Error::EnvelopeViolation { .. } => PpfxtStatus::EnvelopeViolation,
        _ => PpfxtStatus::Numeric,
    }
}

fn fail(status: PpfxtStatus, msg: impl Into<String>) -> PpfxtStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> PpfxtStatus) -> PpfxtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(PpfxtStatus::Panic, format!("panic: {msg}"))
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, PpfxtStatus> {
    if s.is_null() {
        return Err(fail(PpfxtStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(PpfxtStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(PpfxtStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ppfxt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full length including the NUL, or 0 if
/// there is no message.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn emit_scenario(sc: Scenario, out: *mut *mut PpfxtScenario) -> PpfxtStatus {
    // SAFETY: callers check `out` for null before getting here.
    unsafe { *out = Box::into_raw(Box::new(PpfxtScenario { inner: sc })) };
    PpfxtStatus::Ok
}

/// The built-in attitude-tracking scenario (10 s, `dt = 1e-4`).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_default(out: *mut *mut PpfxtScenario) -> PpfxtStatus {
    non_null!(out);
    guard(|| emit_scenario(Scenario::simulation_ii(), out))
}

/// The exponent-study scenario with barrier exponent `m = n = num/den` (odd/odd).
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_exponent_study(num: u32, den: u32, out: *mut *mut PpfxtScenario) -> PpfxtStatus {
    non_null!(out);
    guard(|| match powmath::OddRational::new(num, den) {
        Ok(m) => emit_scenario(Scenario::simulation_i(m), out),
        Err(e) => fail(status_of(&e), e.to_string()),
    })
}

/// Parse and validate a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_from_json(json: *const c_char, out: *mut *mut PpfxtScenario) -> PpfxtStatus {
    non_null!(out);
    guard(|| {
        let text = match str_arg(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match config::from_json_str(text) {
            Ok(sc) => emit_scenario(sc, out),
            Err(e) => fail(PpfxtStatus::Config, e.to_string()),
        }
    })
}

/// Serialize the effective scenario; free the result with [`ppfxt_string_free`].
///
/// # Safety
/// `sc` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_to_json(sc: *const PpfxtScenario, out: *mut *mut c_char) -> PpfxtStatus {
    non_null!(sc, out);
    guard(|| match CString::new(config::to_json_string(&(*sc).inner)) {
        Ok(s) => {
            *out = s.into_raw();
            PpfxtStatus::Ok
        }
        Err(_) => fail(PpfxtStatus::Numeric, "scenario JSON contains a NUL byte"),
    })
}

fn revalidate(sc: &mut Scenario, edit: impl FnOnce(&mut Scenario)) -> PpfxtStatus {
    let mut next = sc.clone();
    edit(&mut next);
    match next.validate() {
        Ok(()) => {
            *sc = next;
            PpfxtStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Set the integration step; the scenario is left unchanged if the result is invalid.
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_set_dt(sc: *mut PpfxtScenario, dt: f64) -> PpfxtStatus {
    non_null!(sc);
    guard(|| revalidate(&mut (*sc).inner, |s| s.sim.dt = dt))
}

/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_set_t_end(sc: *mut PpfxtScenario, t_end: f64) -> PpfxtStatus {
    non_null!(sc);
    guard(|| revalidate(&mut (*sc).inner, |s| s.sim.t_end = t_end))
}

/// Keep every `n`-th step in the trajectory (`n ≥ 1`).
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_set_record_every(sc: *mut PpfxtScenario, n: usize) -> PpfxtStatus {
    non_null!(sc);
    guard(|| revalidate(&mut (*sc).inner, |s| s.sim.record_every = n))
}

/// `baseline` is one of the `PPFXT_BASELINE_*` values.
///
/// # Safety
/// `sc` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_set_baseline(sc: *mut PpfxtScenario, baseline: u32) -> PpfxtStatus {
    non_null!(sc);
    let Some(b) = baseline_from(baseline) else {
        return fail(PpfxtStatus::InvalidArgument, format!("unknown baseline code {baseline}"));
    };
    guard(|| revalidate(&mut (*sc).inner, |s| s.sim.baseline = b))
}

/// # Safety
/// `sc` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_scenario_free(sc: *mut PpfxtScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Run the closed loop. On an envelope violation or numeric failure the
/// status says so and `*out` still receives the trajectory recorded up to
/// the failure.
///
/// # Safety
/// `sc` must be a live handle; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_simulate(sc: *const PpfxtScenario, out: *mut *mut PpfxtTrajectory) -> PpfxtStatus {
    non_null!(sc, out);
    *out = ptr::null_mut();
    guard(|| {
        let scenario = (*sc).inner.clone();
        let (traj, status) = match sim::run(&scenario) {
            Ok(t) => (t, PpfxtStatus::Ok),
            Err(f) => {
                let s = fail(status_of(&f.error), f.to_string());
                (f.partial, s)
            }
        };
        *out = Box::into_raw(Box::new(PpfxtTrajectory { traj, scenario }));
        status
    })
}

/// Number of samples.
///
/// # Safety
/// `tr` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_trajectory_len(tr: *const PpfxtTrajectory) -> usize {
    if tr.is_null() {
        0
    } else {
        (*tr).traj.len()
    }
}

/// Copy series `name` (a CSV column name such as `"t"` or `"e1"`) into `buf`.
/// Copies `min(cap, len)` values and always stores the full length in `*len`.
///
/// # Safety
/// `tr` must be a live handle, `name` NUL-terminated, `buf` null or valid for
/// `cap` doubles, `len` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_trajectory_series(
    tr: *const PpfxtTrajectory,
    name: *const c_char,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PpfxtStatus {
    non_null!(tr, len);
    guard(|| {
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        let Some(series) = (*tr).traj.series(name) else {
            return fail(PpfxtStatus::InvalidArgument, format!("unknown series {name:?}"));
        };
        *len = series.len();
        if !buf.is_null() {
            ptr::copy_nonoverlapping(series.as_ptr(), buf, series.len().min(cap));
        }
        PpfxtStatus::Ok
    })
}

/// # Safety
/// `tr` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_trajectory_metrics(tr: *const PpfxtTrajectory, out: *mut PpfxtMetrics) -> PpfxtStatus {
    non_null!(tr, out);
    guard(|| {
        let t = &*tr;
        if t.traj.is_empty() {
            return fail(PpfxtStatus::InvalidArgument, "empty trajectory");
        }
        match sim::compute_metrics(&t.traj, &t.scenario) {
            Ok(m) => {
                *out = PpfxtMetrics {
                    envelope_violations: m.envelope_violations,
                    prescribed_violations: m.prescribed_violations,
                    max_abs_error_after_ts: m.max_abs_error_after_ts,
                    overshoot: m.overshoot,
                    convergence_time: m.convergence_time.unwrap_or(f64::NAN),
                    control_energy: m.control_energy,
                    peak_input: m.peak_input,
                    final_e1: m.final_e1,
                };
                PpfxtStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `tr` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_trajectory_write_csv(tr: *const PpfxtTrajectory, path: *const c_char) -> PpfxtStatus {
    non_null!(tr);
    guard(|| {
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        match (*tr).traj.save_csv(Path::new(path)) {
            Ok(()) => PpfxtStatus::Ok,
            Err(e) => fail(PpfxtStatus::Io, format!("{path}: {e}")),
        }
    })
}

/// # Safety
/// `tr` must be null or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_trajectory_free(tr: *mut PpfxtTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

fn problem(bp: &PpfxtBoundProblem) -> Result<BoundProblem, Error> {
    BoundProblem::with_fractions(
        bp.mu1,
        bp.mu2,
        bp.mu3,
        Fraction::new(bp.p_num, bp.p_den)?,
        Fraction::new(bp.q_num, bp.q_den)?,
        bp.tau,
    )
}

unsafe fn bound_call(
    bp: *const PpfxtBoundProblem,
    out: *mut f64,
    f: impl FnOnce(&BoundProblem) -> ppfxt::Result<f64>,
) -> PpfxtStatus {
    non_null!(bp, out);
    guard(|| match problem(&*bp).and_then(|p| f(&p)) {
        Ok(v) => {
            *out = v;
            PpfxtStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    })
}

/// Radius of the residual set (0 when `mu3 = 0`).
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_residual(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::residual_bound)
}

/// Gamma-function settling bound.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_t1(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::t1_bound)
}

/// Same bound via the reflection identity.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_t1_reflected(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::t1_bound_reflected)
}

/// Classical bound `1/(τμ1(1-p)) + 1/(τμ2(q-1))`.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_t2(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::t2_classical)
}

/// Arctangent bound; `Precondition` unless `p + q = 2`.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_lemma2(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::t_lemma2)
}

/// Partial-fraction bound; the integer `a` with `(a-1)p + q = a` is detected.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_lemma3(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, |p| match p.lemma3_order() {
        Some(a) => fxtbounds::t_lemma3(p, a),
        None => Err(Error::Precondition { bound: "partial-fraction bound", reason: "no integer a with (a-1)p + q = a".into() }),
    })
}

/// Rational-exponent bound.
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_bound_lemma4(bp: *const PpfxtBoundProblem, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, fxtbounds::t_lemma4)
}

/// Time for the comparison ODE started at `v0` to reach the residual set
/// (or `1e-12` when `mu3 = 0`).
///
/// # Safety
/// `bp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_settle_oracle(bp: *const PpfxtBoundProblem, v0: f64, out: *mut f64) -> PpfxtStatus {
    bound_call(bp, out, |p| fxtbounds::settle_oracle(p, v0).map(|s| s.t_settle))
}

/// Γ(z) for `z > 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ppfxt_gamma(z: f64, out: *mut f64) -> PpfxtStatus {
    non_null!(out);
    guard(|| match powmath::gamma_fn(z) {
        Ok(v) => {
            *out = v;
            PpfxtStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    })
}
