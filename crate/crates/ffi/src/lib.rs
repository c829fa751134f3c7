//! C ABI over `idealflow`.
//!
//! Every function returns an [`IcfStatus`]; results come back through out
//! pointers. On a non-`Ok` status, [`icf_last_error_message`] describes the
//! failure for the calling thread. Objects created here are released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use idealflow::curve::{
    energy, make_circle, make_perturbed_circle, sup_deviation, winding, CurvatureProfile, Mode,
};
use idealflow::error::Error;
use idealflow::flow::{constraint_h, step, FlowState, IntegratorConfig, Scheme};
use idealflow::grid::GridFunction;
use idealflow::io::config::parse_config;
use idealflow::io::output::run_experiment;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    WindingMismatch = 3,
    Blowup = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcfScheme {
    ImexEuler = 0,
    ImexBdf2 = 1,
    ExplicitRk4 = 2,
}

impl From<IcfScheme> for Scheme {
    fn from(s: IcfScheme) -> Self {
        match s {
            IcfScheme::ImexEuler => Scheme::ImexEuler,
            IcfScheme::ImexBdf2 => Scheme::ImexBdf2,
            IcfScheme::ExplicitRk4 => Scheme::ExplicitRk4,
        }
    }
}

/// Opaque curvature profile.
pub struct IcfProfile(CurvatureProfile);

/// Opaque flow state with its integrator settings.
pub struct IcfFlow {
    state: FlowState,
    config: IntegratorConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> IcfStatus {
    match e {
        Error::WindingMismatch { .. } | Error::ZeroWinding => IcfStatus::WindingMismatch,
        Error::Blowup { .. } | Error::NonFinite { .. } => IcfStatus::Blowup,
        Error::Config(_) | Error::Json(_) | Error::SamplesFile { .. } => IcfStatus::Config,
        Error::Io { .. } => IcfStatus::Io,
        _ => IcfStatus::InvalidArgument,
    }
}

/// Runs `body`, turning errors and panics into a status plus message.
fn guard(body: impl FnOnce() -> Result<(), IcfStatus>) -> IcfStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IcfStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            IcfStatus::Panic
        }
    }
}

fn fail(e: Error) -> IcfStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> IcfStatus {
    set_error(format!("`{what}` is null"));
    IcfStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, IcfStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, IcfStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], IcfStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), IcfStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_profile(out: *mut *mut IcfProfile, p: CurvatureProfile) -> Result<(), IcfStatus> {
    put(out, Box::into_raw(Box::new(IcfProfile(p))), "out")
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), IcfStatus> {
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return Err(IcfStatus::BufferTooSmall);
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn icf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Exact `omega`-fold circle of total length `length` on `n` nodes.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_circle(
    length: f64,
    omega: i64,
    n: usize,
    out: *mut *mut IcfProfile,
) -> IcfStatus {
    guard(|| {
        let p = make_circle(length, omega, n).map_err(fail)?;
        put_profile(out, p)
    })
}

/// Circle plus `sum a_i cos(2 pi m_i s / L + phase_i)`.
///
/// # Safety
/// `modes`, `amplitudes` and `phases` must each hold `count` values; `out`
/// must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_perturbed(
    length: f64,
    omega: i64,
    n: usize,
    modes: *const u32,
    amplitudes: *const f64,
    phases: *const f64,
    count: usize,
    out: *mut *mut IcfProfile,
) -> IcfStatus {
    guard(|| {
        let ms = slice(modes, count, "modes")?;
        let amps = slice(amplitudes, count, "amplitudes")?;
        let phs = slice(phases, count, "phases")?;
        let list: Vec<Mode> = (0..count)
            .map(|i| Mode::new(ms[i], amps[i], phs[i]))
            .collect();
        let p = make_perturbed_circle(length, omega, n, &list).map_err(fail)?;
        put_profile(out, p)
    })
}

/// Profile from `n` curvature samples at `s_j = j length / n`.
///
/// # Safety
/// `samples` must hold `n` values; `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_from_samples(
    samples: *const f64,
    n: usize,
    length: f64,
    omega: i64,
    out: *mut *mut IcfProfile,
) -> IcfStatus {
    guard(|| {
        let k = slice(samples, n, "samples")?.to_vec();
        let grid = GridFunction::new(k, length).map_err(fail)?;
        let p = CurvatureProfile::new(grid, omega).map_err(fail)?;
        put_profile(out, p)
    })
}

/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_free(profile: *mut IcfProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `profile` must be a live profile; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_len(profile: *const IcfProfile, out: *mut usize) -> IcfStatus {
    guard(|| put(out, deref(profile, "profile")?.0.n(), "out"))
}

/// `E = 1/2 integral k_s^2 ds`.
///
/// # Safety
/// `profile` must be a live profile; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_energy(
    profile: *const IcfProfile,
    out: *mut f64,
) -> IcfStatus {
    guard(|| put(out, energy(&deref(profile, "profile")?.0), "out"))
}

/// Measured winding number `integral k ds / 2 pi`.
///
/// # Safety
/// `profile` must be a live profile; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_winding(
    profile: *const IcfProfile,
    out: *mut f64,
) -> IcfStatus {
    guard(|| put(out, winding(&deref(profile, "profile")?.0), "out"))
}

/// The length-preserving multiplier `h`.
///
/// # Safety
/// `profile` must be a live profile; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_constraint_h(
    profile: *const IcfProfile,
    out: *mut f64,
) -> IcfStatus {
    guard(|| put(out, constraint_h(&deref(profile, "profile")?.0), "out"))
}

/// `max |k - 2 pi omega / L|`.
///
/// # Safety
/// `profile` must be a live profile; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_sup_deviation(
    profile: *const IcfProfile,
    out: *mut f64,
) -> IcfStatus {
    guard(|| put(out, sup_deviation(&deref(profile, "profile")?.0), "out"))
}

/// Copies the curvature samples into `buf`, which must hold `len >= n`.
///
/// # Safety
/// `profile` must be a live profile; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn icf_profile_copy_curvature(
    profile: *const IcfProfile,
    buf: *mut f64,
    len: usize,
) -> IcfStatus {
    guard(|| copy_out(deref(profile, "profile")?.0.k().samples(), buf, len))
}

/// Starts a flow at a copy of `profile`. `blowup_cap <= 0` selects the
/// default cap.
///
/// # Safety
/// `profile` must be a live profile; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_new(
    profile: *const IcfProfile,
    scheme: IcfScheme,
    dt: f64,
    blowup_cap: f64,
    out: *mut *mut IcfFlow,
) -> IcfStatus {
    guard(|| {
        let p = deref(profile, "profile")?;
        let mut config = IntegratorConfig {
            scheme: scheme.into(),
            dt,
            ..IntegratorConfig::default()
        };
        config.stop.blowup_cap = (blowup_cap > 0.0).then_some(blowup_cap);
        config.validate().map_err(fail)?;
        let flow = IcfFlow {
            state: FlowState::new(p.0.clone()),
            config,
        };
        put(out, Box::into_raw(Box::new(flow)), "out")
    })
}

/// Advances `steps` time steps. On failure the flow keeps the last good
/// state.
///
/// # Safety
/// `flow` must be a live flow.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_step(flow: *mut IcfFlow, steps: u64) -> IcfStatus {
    guard(|| {
        let f = deref_mut(flow, "flow")?;
        for _ in 0..steps {
            f.state = step(&f.state, &f.config).map_err(fail)?;
        }
        Ok(())
    })
}

/// # Safety
/// `flow` must be a live flow; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_time(flow: *const IcfFlow, out: *mut f64) -> IcfStatus {
    guard(|| put(out, deref(flow, "flow")?.state.t, "out"))
}

/// # Safety
/// `flow` must be a live flow; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_energy(flow: *const IcfFlow, out: *mut f64) -> IcfStatus {
    guard(|| put(out, energy(&deref(flow, "flow")?.state.profile), "out"))
}

/// # Safety
/// `flow` must be a live flow; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_copy_curvature(
    flow: *const IcfFlow,
    buf: *mut f64,
    len: usize,
) -> IcfStatus {
    guard(|| copy_out(deref(flow, "flow")?.state.profile.k().samples(), buf, len))
}

/// Snapshot of the current profile, owned by the caller.
///
/// # Safety
/// `flow` must be a live flow; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_profile(
    flow: *const IcfFlow,
    out: *mut *mut IcfProfile,
) -> IcfStatus {
    guard(|| {
        let p = deref(flow, "flow")?.state.profile.clone();
        put_profile(out, p)
    })
}

/// # Safety
/// `flow` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn icf_flow_free(flow: *mut IcfFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// Runs a JSON configuration and writes its artifacts to `out_dir`.
/// `passed` receives whether every hard monitor passed.
///
/// # Safety
/// `config_json` and `out_dir` must be NUL-terminated UTF-8; `passed` must
/// be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn icf_run_config_json(
    config_json: *const c_char,
    out_dir: *const c_char,
    passed: *mut bool,
) -> IcfStatus {
    guard(|| {
        let text = c_str(config_json, "config_json")?;
        let dir = c_str(out_dir, "out_dir")?;
        let cfg = parse_config(text).map_err(fail)?;
        let outcome = run_experiment(&cfg, Path::new(dir)).map_err(fail)?;
        put(passed, outcome.passed(), "passed")
    })
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, IcfStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("`{what}` is not valid UTF-8"));
        IcfStatus::InvalidArgument
    })
}
