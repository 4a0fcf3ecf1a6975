//! C interface to the densify toolkit.
//!
//! Every function returns a [`DensifyStatus`]. On failure the message is
//! available from [`densify_last_error`] on the same thread. Handles come from
//! `densify_config_from_*` and must be released with [`densify_config_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use densify::experiments::predict_regime;
use densify::sinr::{estimate_capacity, estimate_coverage};
use densify::tail::{analytic_tail_p, asymptotic_tail_p};
use densify::{Density, Error, ExperimentConfig, Regime};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensifyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The configuration failed to parse or violates a model constraint.
    Validation = 3,
    Numeric = 4,
    Divergent = 5,
    Unsupported = 6,
    Io = 7,
    /// A bug inside the library; the message has details.
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensifyRegime {
    Growth = 0,
    Saturation = 1,
    InverseU = 2,
    Unclassified = 3,
}

impl From<Regime> for DensifyRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::Growth => DensifyRegime::Growth,
            Regime::Saturation => DensifyRegime::Saturation,
            Regime::InverseU => DensifyRegime::InverseU,
            Regime::Unclassified => DensifyRegime::Unclassified,
        }
    }
}

/// Opaque experiment configuration.
pub struct DensifyConfig {
    inner: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> DensifyStatus {
    match e {
        Error::Validation { .. } | Error::Config { .. } => DensifyStatus::Validation,
        Error::Domain { .. } | Error::InsufficientData { .. } | Error::Degenerate(_) | Error::Precondition(_) => {
            DensifyStatus::InvalidArgument
        }
        Error::Divergent(_) => DensifyStatus::Divergent,
        Error::Atomic | Error::Unsupported(_) => DensifyStatus::Unsupported,
        Error::Numeric(_) => DensifyStatus::Numeric,
        Error::Io(_) => DensifyStatus::Io,
    }
}

struct Fail(DensifyStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(DensifyStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic for `densify_last_error`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DensifyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DensifyStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            DensifyStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(DensifyStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn config<'a>(p: *const DensifyConfig) -> Result<&'a ExperimentConfig, Fail> {
    p.as_ref().map(|c| &c.inner).ok_or_else(|| null("config"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

fn store(out: *mut *mut DensifyConfig, cfg: ExperimentConfig) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { out.write(Box::into_raw(Box::new(DensifyConfig { inner: cfg }))) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn densify_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn densify_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a configuration from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn densify_config_from_toml(toml: *const c_char, out: *mut *mut DensifyConfig) -> DensifyStatus {
    guard(|| {
        let src = text(toml, "toml")?;
        store(out, ExperimentConfig::from_toml(src)?)
    })
}

/// Loads a bundled preset such as "fig1a".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn densify_config_from_preset(name: *const c_char, out: *mut *mut DensifyConfig) -> DensifyStatus {
    guard(|| {
        let name = text(name, "name")?;
        store(out, ExperimentConfig::preset(name)?)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn densify_config_free(cfg: *mut DensifyConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Overrides the master seed.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn densify_config_set_seed(cfg: *mut DensifyConfig, seed: u64) -> DensifyStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("config"))?;
        c.inner = c.inner.clone().with_seed(seed);
        Ok(())
    })
}

/// Overrides the number of realizations per density.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn densify_config_set_trials(cfg: *mut DensifyConfig, trials: u64) -> DensifyStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| null("config"))?;
        if trials == 0 {
            return Err(Fail(DensifyStatus::InvalidArgument, "trials must be at least 1".into()));
        }
        c.inner = c.inner.clone().with_trials(trials);
        Ok(())
    })
}

/// Path loss at distance `r` metres.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_pathloss(cfg: *const DensifyConfig, r: f64, out: *mut f64) -> DensifyStatus {
    guard(|| write(out, config(cfg)?.sim.model.eval(r)?))
}

/// Probability that a uniform node lies within `r` metres of the origin.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_distance_cdf(cfg: *const DensifyConfig, r: f64, out: *mut f64) -> DensifyStatus {
    guard(|| write(out, config(cfg)?.sim.model.domain().distance_cdf(r)?))
}

/// Probability that one node's received power exceeds `t`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_tail(cfg: *const DensifyConfig, t: f64, out: *mut f64) -> DensifyStatus {
    guard(|| {
        let c = config(cfg)?;
        write(out, analytic_tail_p(t, &c.sim.model, &c.sim.fading)?)
    })
}

/// Large-`t` approximation of [`densify_tail`] for regularly varying fading.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_tail_asymptotic(cfg: *const DensifyConfig, t: f64, out: *mut f64) -> DensifyStatus {
    guard(|| {
        let c = config(cfg)?;
        write(out, asymptotic_tail_p(t, &c.sim.model, &c.sim.fading)?)
    })
}

/// Regime implied by the tail of the received power.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_predict_regime(cfg: *const DensifyConfig, out: *mut DensifyRegime) -> DensifyStatus {
    guard(|| {
        let c = config(cfg)?;
        write(out, predict_regime(&c.sim.model, &c.sim.fading)?.into())
    })
}

/// Simulated coverage `Pr(SINR >= y)` at density `lambda_km2` for each of the
/// `n` ascending thresholds in `y`. Writes `n` estimates to `p_hat` and, if
/// `ci` is not NULL, their 95% half-widths.
///
/// # Safety
/// `y` and `p_hat` must hold `n` values, as must `ci` when given.
#[no_mangle]
pub unsafe extern "C" fn densify_coverage(
    cfg: *const DensifyConfig,
    lambda_km2: f64,
    y: *const f64,
    n: usize,
    p_hat: *mut f64,
    ci: *mut f64,
) -> DensifyStatus {
    guard(|| {
        let c = config(cfg)?;
        if y.is_null() || p_hat.is_null() {
            return Err(null("threshold or result array"));
        }
        let grid = std::slice::from_raw_parts(y, n);
        let curve = estimate_coverage(&c.sim, Density::per_km2(lambda_km2)?, grid)?;
        std::slice::from_raw_parts_mut(p_hat, n).copy_from_slice(&curve.p_hat);
        if !ci.is_null() {
            std::slice::from_raw_parts_mut(ci, n).copy_from_slice(&curve.ci_halfwidth);
        }
        Ok(())
    })
}

/// Simulated mean of `ln(1 + SINR)` at density `lambda_km2`, in nats/s/Hz,
/// with its standard error when `std_err` is not NULL.
///
/// # Safety
/// `cfg` must be a live handle and `c_hat` writable.
#[no_mangle]
pub unsafe extern "C" fn densify_capacity(
    cfg: *const DensifyConfig,
    lambda_km2: f64,
    c_hat: *mut f64,
    std_err: *mut f64,
) -> DensifyStatus {
    guard(|| {
        let c = config(cfg)?;
        let est = estimate_capacity(&c.sim, Density::per_km2(lambda_km2)?)?;
        if est.diverged {
            return Err(Fail(DensifyStatus::Divergent, "capacity estimate diverged".into()));
        }
        write(c_hat, est.c_hat)?;
        if !std_err.is_null() {
            std_err.write(est.std_err);
        }
        Ok(())
    })
}
