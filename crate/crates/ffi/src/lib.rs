//! C interface to `recurlab`.
//!
//! Handles are opaque and owned by the caller, who releases them with the matching `*_free`.
//! Every fallible function returns an [`RlStatus`]; on failure the message is kept per thread
//! and can be read with [`rl_last_error`]. Strings returned through out-pointers are allocated
//! here and must be released with [`rl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use num_bigint::BigUint;
use recurlab::classify::{classify_point, default_grid, ClassifyParams};
use recurlab::construction::BlockProgram;
use recurlab::density::{density_profile, return_count, DensityOptions};
use recurlab::entropy::{find_turbulence, lap_entropy};
use recurlab::rational::{parse_rational, Rat};
use recurlab::systems::{State, System, SystemConfig};
use recurlab::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Resource = 4,
    OutOfRange = 5,
    Indeterminate = 6,
    KindMismatch = 7,
    NotInvertible = 8,
    Io = 9,
    Panic = 10,
}

/// A built construction program.
pub struct RlProgram {
    inner: Arc<BlockProgram>,
}

/// A dynamical system built from a JSON descriptor.
pub struct RlSystem {
    inner: System,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::KindMismatch { .. } => RlStatus::KindMismatch,
        Error::InvalidState(_) | Error::InvalidArgument(_) => RlStatus::InvalidArgument,
        Error::Config(_) | Error::Json(_) => RlStatus::Config,
        Error::Indeterminate { .. } => RlStatus::Indeterminate,
        Error::OutOfRange { .. } => RlStatus::OutOfRange,
        Error::Resource(_) => RlStatus::Resource,
        Error::NotInvertible { .. } => RlStatus::NotInvertible,
        Error::Io(_) => RlStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

unsafe fn opt_text<'a>(p: *const c_char, what: &'static str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Lib(Error::InvalidArgument("output contains nul".into())))?;
    put(out, c.into_raw(), "out")
}

unsafe fn system<'a>(p: *const RlSystem) -> Result<&'a RlSystem, Failure> {
    p.as_ref().ok_or(Failure::Null("system"))
}

unsafe fn point(sys: &RlSystem, program: *const RlProgram, text_point: *const c_char) -> Result<State, Failure> {
    let program = program.as_ref().map(|p| &p.inner);
    Ok(sys.inner.parse_point(text(text_point, "point")?, program)?)
}

fn radii(list: Option<&str>) -> Result<Vec<Rat>, Failure> {
    match list {
        None => Ok(default_grid()),
        Some(s) => Ok(s.split(',').map(|r| parse_rational(r.trim())).collect::<recurlab::Result<_>>()?),
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or null. Release with [`rl_string_free`].
#[no_mangle]
pub extern "C" fn rl_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must be null or a string returned by this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds the construction up to `level` with seed `seed_k`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rl_program_new(level: usize, seed_k: u64, out: *mut *mut RlProgram) -> RlStatus {
    guard(|| {
        let program = BlockProgram::build(level, seed_k)?;
        let handle = Box::into_raw(Box::new(RlProgram { inner: Arc::new(program) }));
        put(out, handle, "out")
    })
}

/// # Safety
/// `p` must be null or a handle from [`rl_program_new`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn rl_program_free(p: *mut RlProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Symbol of the constructed word at a decimal index.
///
/// # Safety
/// `p` must be a live program handle, `index` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_program_symbol_at(p: *const RlProgram, index: *const c_char, out: *mut u8) -> RlStatus {
    guard(|| {
        let program = p.as_ref().ok_or(Failure::Null("program"))?;
        let i: BigUint = text(index, "index")?
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument("index must be a non-negative integer".into()))?;
        put(out, program.inner.symbol_at(&i)?, "out")
    })
}

/// Checkpoint table as CSV.
///
/// # Safety
/// `p` must be a live program handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_program_checkpoints_csv(p: *const RlProgram, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let program = p.as_ref().ok_or(Failure::Null("program"))?;
        put_string(out, program.inner.checkpoints_csv())
    })
}

/// Builds a system from its JSON descriptor.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_system_from_json(json: *const c_char, out: *mut *mut RlSystem) -> RlStatus {
    guard(|| {
        let cfg = SystemConfig::from_json(text(json, "json")?)?;
        let handle = Box::into_raw(Box::new(RlSystem { inner: cfg.build()? }));
        put(out, handle, "out")
    })
}

/// # Safety
/// `s` must be null or a handle from [`rl_system_from_json`] that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn rl_system_free(s: *mut RlSystem) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// `#{0 <= j < horizon : d(x, f^j x) < radius}`. `program` may be null unless the point is `u`.
///
/// # Safety
/// Handles must be live or null where allowed; strings nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_return_count(
    sys: *const RlSystem,
    program: *const RlProgram,
    point_text: *const c_char,
    radius: *const c_char,
    horizon: u64,
    out: *mut u64,
) -> RlStatus {
    guard(|| {
        let s = system(sys)?;
        let x = point(s, program, point_text)?;
        let t = parse_rational(text(radius, "radius")?)?;
        let c = return_count(&s.inner, &x, &t, &BigUint::from(horizon))?;
        let c = u64::try_from(c).map_err(|_| Error::Resource("count exceeds u64".into()))?;
        put(out, c, "out")
    })
}

/// Density profile as CSV. `radii` is a comma-separated list, or null for the default grid.
///
/// # Safety
/// As for [`rl_return_count`].
#[no_mangle]
pub unsafe extern "C" fn rl_density_csv(
    sys: *const RlSystem,
    program: *const RlProgram,
    point_text: *const c_char,
    radii_list: *const c_char,
    horizon: u64,
    n_min: u64,
    out: *mut *mut c_char,
) -> RlStatus {
    guard(|| {
        let s = system(sys)?;
        let x = point(s, program, point_text)?;
        let grid = radii(opt_text(radii_list, "radii")?)?;
        let opts = DensityOptions { n_min, ..Default::default() };
        let profile = density_profile(&s.inner, &x, &grid, horizon, &opts)?;
        put_string(out, profile.to_csv(text(point_text, "point")?))
    })
}

/// Recurrence profile as JSON. Null thresholds select the defaults.
///
/// # Safety
/// As for [`rl_return_count`].
#[no_mangle]
pub unsafe extern "C" fn rl_classify_json(
    sys: *const RlSystem,
    program: *const RlProgram,
    point_text: *const c_char,
    radii_list: *const c_char,
    horizon: u64,
    theta_high: *const c_char,
    theta_low: *const c_char,
    out: *mut *mut c_char,
) -> RlStatus {
    guard(|| {
        let s = system(sys)?;
        let x = point(s, program, point_text)?;
        let grid = radii(opt_text(radii_list, "radii")?)?;
        let mut params = ClassifyParams::default();
        if let Some(t) = opt_text(theta_high, "theta_high")? {
            params.theta_high = parse_rational(t)?;
        }
        if let Some(t) = opt_text(theta_low, "theta_low")? {
            params.theta_low = parse_rational(t)?;
        }
        params.n_min = params.n_min.min(horizon.max(1));
        let profile = classify_point(&s.inner, &x, text(point_text, "point")?, &grid, horizon, &params)?;
        put_string(out, profile.to_json())
    })
}

fn interval_map(s: &RlSystem) -> Result<&recurlab::systems::IntervalPLMap, Failure> {
    match &s.inner {
        System::IntervalPL(f) => Ok(f),
        other => Err(Error::KindMismatch { system: other.kind(), state: "interval map" }.into()),
    }
}

/// Lap-growth entropy estimate and the number of iterates actually computed.
///
/// # Safety
/// `sys` must be a live handle; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn rl_lap_entropy(
    sys: *const RlSystem,
    n_max: usize,
    out_estimate: *mut f64,
    out_achieved: *mut usize,
) -> RlStatus {
    guard(|| {
        let growth = lap_entropy(interval_map(system(sys)?)?, n_max)?;
        put(out_estimate, growth.estimate, "out_estimate")?;
        put(out_achieved, growth.achieved, "out_achieved")
    })
}

/// Turbulence witness as JSON, or the string `null` when the search up to `m_max` fails.
///
/// # Safety
/// `sys` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rl_turbulence_json(sys: *const RlSystem, m_max: u32, out: *mut *mut c_char) -> RlStatus {
    guard(|| {
        let w = find_turbulence(interval_map(system(sys)?)?, m_max)?;
        put_string(out, w.map_or_else(|| "null".to_string(), |w| w.to_json()))
    })
}
