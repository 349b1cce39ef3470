//! C interface to `rosenblatt-lab`.
//!
//! Every fallible function returns an `int32_t` status: `RL_OK` (0) on success, otherwise an
//! error code. Codes 1 to 16 mirror the library error kinds; the remaining `RL_*` constants
//! cover failures at the boundary itself. The message of the most recent failure on the calling
//! thread is available from [`rl_last_error_message`].
//!
//! Objects are opaque handles created by `rl_*_new`/`rl_*_build` functions and released with the
//! matching `rl_*_free`. Handles are immutable after creation and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rosenblatt_lab::covmodels::{covariance_eval, spectral_density, CovarianceModel};
use rosenblatt_lab::expcli::ks_distance;
use rosenblatt_lab::geometry::{distance_pdf, indicator_ft, volume, DomainSet};
use rosenblatt_lab::ratelab::{kappa1, kappa_bound, RateInputs};
use rosenblatt_lab::rosenblatt::{cumulant, reference_series, EigenSeries};
use rosenblatt_lab::specfun::{bessel_j, bessel_k, gamma_fn};
use rosenblatt_lab::Error;

/// Success.
pub const RL_OK: i32 = 0;
/// Library error kinds.
pub const RL_ERR_DOMAIN: i32 = 1;
pub const RL_ERR_PARAMETER: i32 = 2;
pub const RL_ERR_REGIME: i32 = 3;
pub const RL_ERR_UNSUPPORTED: i32 = 4;
pub const RL_ERR_ACCURACY: i32 = 5;
pub const RL_ERR_INTEGRABILITY: i32 = 6;
pub const RL_ERR_EMBEDDING: i32 = 7;
pub const RL_ERR_COVERAGE: i32 = 8;
pub const RL_ERR_RANK_VIOLATION: i32 = 9;
pub const RL_ERR_RANK_UNDETECTED: i32 = 10;
pub const RL_ERR_INPUT: i32 = 11;
pub const RL_ERR_DEGENERATE_FIT: i32 = 12;
pub const RL_ERR_NUMERIC: i32 = 13;
pub const RL_ERR_PRECONDITION: i32 = 14;
pub const RL_ERR_IO: i32 = 15;
pub const RL_ERR_JSON: i32 = 16;
/// A required pointer argument was null.
pub const RL_NULL_POINTER: i32 = 100;
/// A caller-provided buffer is too small; the required length has been written.
pub const RL_BUFFER_TOO_SMALL: i32 = 101;
/// The library panicked; this indicates a bug.
pub const RL_PANIC: i32 = 102;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(code: i32, msg: impl Into<String>) -> i32 {
    set_last_error(msg.into());
    code
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), i32>>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            RL_OK
        }
        Ok(Err(code)) => code,
        Err(_) => fail(RL_PANIC, "internal panic"),
    }
}

fn lib<T>(r: rosenblatt_lab::Result<T>) -> Result<T, i32> {
    r.map_err(|e: Error| fail(e.code(), e.to_string()))
}

fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, i32> {
    // SAFETY: callers promise that non-null output pointers are valid and writable.
    unsafe { p.as_mut() }.ok_or_else(|| fail(RL_NULL_POINTER, "output pointer is null"))
}

fn in_ref<'a, T>(p: *const T) -> Result<&'a T, i32> {
    // SAFETY: handles are only produced by this library and stay valid until freed.
    unsafe { p.as_ref() }.ok_or_else(|| fail(RL_NULL_POINTER, "handle is null"))
}

fn in_slice<'a>(p: *const f64, len: usize) -> Result<&'a [f64], i32> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RL_NULL_POINTER, "array pointer is null"));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn out_slice<'a>(p: *mut f64, len: usize) -> Result<&'a mut [f64], i32> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(RL_NULL_POINTER, "buffer pointer is null"));
    }
    // SAFETY: the caller guarantees `len` writable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
/// `len` bytes) and returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Gamma function.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_gamma(x: f64, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(gamma_fn(x))?;
        Ok(())
    })
}

/// Bessel function of the first kind `J_ν(x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_bessel_j(nu: f64, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(bessel_j(nu, x))?;
        Ok(())
    })
}

/// Modified Bessel function of the second kind `K_ν(x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_bessel_k(nu: f64, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(bessel_k(nu, x))?;
        Ok(())
    })
}

/// Opaque covariance model.
pub struct RlModel(CovarianceModel);

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), i32> {
    *out_ptr(out)? = Box::into_raw(Box::new(value));
    Ok(())
}

/// Creates a Cauchy model `(1 + r²)^{-θ}` in dimension `d`.
///
/// # Safety
/// `out` must be a valid pointer; the handle must be released with [`rl_model_free`].
#[no_mangle]
pub unsafe extern "C" fn rl_model_cauchy(d: u32, theta: f64, out: *mut *mut RlModel) -> i32 {
    guard(|| boxed(out, RlModel(lib(CovarianceModel::cauchy(d, theta))?)))
}

/// Creates a generalized Linnik model `(1 + r^σ)^{-θ}`.
///
/// # Safety
/// As for [`rl_model_cauchy`].
#[no_mangle]
pub unsafe extern "C" fn rl_model_linnik(d: u32, sigma: f64, theta: f64, out: *mut *mut RlModel) -> i32 {
    guard(|| boxed(out, RlModel(lib(CovarianceModel::linnik(d, sigma, theta))?)))
}

/// Creates a local-global model.
///
/// # Safety
/// As for [`rl_model_cauchy`].
#[no_mangle]
pub unsafe extern "C" fn rl_model_local_global(d: u32, alpha: f64, theta: f64, out: *mut *mut RlModel) -> i32 {
    guard(|| boxed(out, RlModel(lib(CovarianceModel::local_global(d, alpha, theta))?)))
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn rl_model_free(model: *mut RlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Covariance `B(r)`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_model_covariance(model: *const RlModel, r: f64, out: *mut f64) -> i32 {
    guard(|| {
        let m = in_ref(model)?;
        *out_ptr(out)? = lib(covariance_eval(&m.0, r))?;
        Ok(())
    })
}

/// Spectral density `f(λ)`.
///
/// # Safety
/// As for [`rl_model_covariance`].
#[no_mangle]
pub unsafe extern "C" fn rl_model_spectral_density(model: *const RlModel, lambda: f64, out: *mut f64) -> i32 {
    guard(|| {
        let m = in_ref(model)?;
        *out_ptr(out)? = lib(spectral_density(&m.0, lambda))?;
        Ok(())
    })
}

/// Opaque observation set.
pub struct RlSet(DomainSet);

/// Creates the ball of radius `radius` centred at the origin of `R^d`.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with [`rl_set_free`].
#[no_mangle]
pub unsafe extern "C" fn rl_set_ball(d: u32, radius: f64, out: *mut *mut RlSet) -> i32 {
    guard(|| boxed(out, RlSet(lib(DomainSet::ball(d, radius))?)))
}

/// Creates the rectangle `Π [lower_j, upper_j]` from two arrays of length `d`.
///
/// # Safety
/// `lower` and `upper` must point to `d` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_set_rect(lower: *const f64, upper: *const f64, d: usize, out: *mut *mut RlSet) -> i32 {
    guard(|| {
        let (a, b) = (in_slice(lower, d)?.to_vec(), in_slice(upper, d)?.to_vec());
        boxed(out, RlSet(lib(DomainSet::rect(a, b))?))
    })
}

/// Releases a set handle. Null is ignored.
///
/// # Safety
/// `set` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rl_set_free(set: *mut RlSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Dimension of a set.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_set_dim(set: *const RlSet, out: *mut u32) -> i32 {
    guard(|| {
        *out_ptr(out)? = in_ref(set)?.0.dim();
        Ok(())
    })
}

/// Lebesgue measure of the scaled set `rΔ`.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_set_volume(set: *const RlSet, r: f64, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(volume(&in_ref(set)?.0, r))?;
        Ok(())
    })
}

/// Density at `z` of the distance between two independent uniform points of `rΔ`.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_set_distance_pdf(set: *const RlSet, r: f64, z: f64, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(distance_pdf(&in_ref(set)?.0, r, z))?;
        Ok(())
    })
}

/// Fourier transform `∫_Δ e^{i⟨x,u⟩} du` at the point `x` of length `d`.
///
/// # Safety
/// `x` must point to `d` doubles; `re` and `im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rl_set_indicator_ft(set: *const RlSet, x: *const f64, d: usize, re: *mut f64, im: *mut f64) -> i32 {
    guard(|| {
        let v = lib(indicator_ft(&in_ref(set)?.0, in_slice(x, d)?))?;
        *out_ptr(re)? = v.re;
        *out_ptr(im)? = v.im;
        Ok(())
    })
}

/// Opaque calibrated chi-square series of a Rosenblatt-type law.
pub struct RlSeries(EigenSeries);

/// Builds and calibrates the limit law of `(Δ, α)` with default discretisation settings.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer; release with [`rl_series_free`].
#[no_mangle]
pub unsafe extern "C" fn rl_rosenblatt_build(set: *const RlSet, alpha: f64, out: *mut *mut RlSeries) -> i32 {
    guard(|| {
        let r = lib(reference_series(&in_ref(set)?.0, alpha))?;
        boxed(out, RlSeries(r.series))
    })
}

/// Releases a series handle. Null is ignored.
///
/// # Safety
/// `series` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rl_series_free(series: *mut RlSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Copies the eigenvalues into `buf`. `written` receives the number of eigenvalues; when it
/// exceeds `len`, nothing is copied and `RL_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `buf` must point to `len` writable doubles (or be null with `len == 0`).
#[no_mangle]
pub unsafe extern "C" fn rl_series_eigenvalues(series: *const RlSeries, buf: *mut f64, len: usize, written: *mut usize) -> i32 {
    guard(|| {
        let s = in_ref(series)?;
        let n = s.0.eigenvalues.len();
        *out_ptr(written)? = n;
        if n > len {
            return Err(fail(RL_BUFFER_TOO_SMALL, format!("buffer holds {len} values, {n} needed")));
        }
        out_slice(buf, len)?[..n].copy_from_slice(&s.0.eigenvalues);
        Ok(())
    })
}

/// Variance of the law, including the Gaussian remainder.
///
/// # Safety
/// `series` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_series_variance(series: *const RlSeries, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = in_ref(series)?.0.variance();
        Ok(())
    })
}

/// Cumulant of order `p ≥ 2`.
///
/// # Safety
/// `series` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_series_cumulant(series: *const RlSeries, p: u32, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(cumulant(&in_ref(series)?.0, p))?;
        Ok(())
    })
}

/// Fills `buf` with `n` draws; the output depends only on `(n, seed)`.
///
/// # Safety
/// `buf` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_series_sample(series: *const RlSeries, n: usize, seed: u64, buf: *mut f64) -> i32 {
    guard(|| {
        let s = in_ref(series)?;
        let out = out_slice(buf, n)?;
        out.copy_from_slice(&lib(s.0.sample(n, seed))?);
        Ok(())
    })
}

/// `κ₁` and the rate bound for `(d, α, q, υ)`; either output pointer may be null.
///
/// # Safety
/// Non-null output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rl_rate_bound(d: u32, alpha: f64, q: f64, upsilon: f64, kappa1_out: *mut f64, bound_out: *mut f64) -> i32 {
    guard(|| {
        let inp = lib(RateInputs::new(d, alpha, q, upsilon))?;
        if let Some(k) = kappa1_out.as_mut() {
            *k = kappa1(&inp);
        }
        if let Some(b) = bound_out.as_mut() {
            *b = kappa_bound(&inp);
        }
        Ok(())
    })
}

/// Two-sample Kolmogorov distance.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_ks_distance(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut f64) -> i32 {
    guard(|| {
        *out_ptr(out)? = lib(ks_distance(in_slice(a, na)?, in_slice(b, nb)?))?;
        Ok(())
    })
}
