//! C ABI over `seqproc`.
//!
//! Objects are opaque handles created by `sp_*_new`/`sp_*_gen`/test functions
//! and released with the matching `sp_*_free`. Every fallible call returns an
//! [`SpStatus`]; on failure `sp_last_error` describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seqproc::cpt_test::{run_cpt_test, CptConfig, ThresholdGrid, TimeGrid};
use seqproc::limits::{dense_levels, functional_quantiles, ks_cdf, ks_quantile, Functional, DEFAULT_BRIDGE_RESOLUTION};
use seqproc::report::TestReport;
use seqproc::seriesgen::{gen_setar, Innovation, Origin, RegressionSample, SetarSpec, UnivariateSeries};
use seqproc::setar_test::{run_setar_test, SetarTables, SetarTestConfig, StatisticChoice};
use seqproc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateData = 3,
    Factorization = 4,
    Numeric = 5,
    Internal = 6,
}

/// Observations `Y_0, ..., Y_n`.
pub struct SpSeries(UnivariateSeries);

/// Responses with `d`-dimensional regressors.
pub struct SpSample(RegressionSample);

pub struct SpReport(TestReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::DegenerateData(_) => SpStatus::DegenerateData,
        Error::Factorization { .. } => SpStatus::Factorization,
        Error::NonFinite(_) => SpStatus::Numeric,
        Error::Io(_) | Error::Json(_) => SpStatus::Internal,
        _ => SpStatus::InvalidArgument,
    }
}

fn guard<F: FnOnce() -> Result<(), SpStatus>>(f: F) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SpStatus::Internal
        }
    }
}

fn fail(e: Error) -> SpStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null() -> SpStatus {
    set_error("null pointer argument".into());
    SpStatus::NullPointer
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Wraps `len >= 2` values `Y_0..Y_{len-1}`.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_series_new(values: *const f64, len: usize, out: *mut *mut SpSeries) -> SpStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return Err(null());
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let s = UnivariateSeries::new(v, Origin::Ingested { source: None }).map_err(fail)?;
        put(out, SpSeries(s));
        Ok(())
    })
}

/// Two-regime threshold series with gaussian innovations of scale `sigma`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_series_gen_setar(
    n: usize,
    mu1: f64,
    mu2: f64,
    threshold: f64,
    sigma: f64,
    seed: u64,
    out: *mut *mut SpSeries,
) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = SetarSpec::new(n, mu1, mu2, threshold, Innovation::Gaussian { sigma });
        put(out, SpSeries(gen_setar(&spec, seed).map_err(fail)?));
        Ok(())
    })
}

/// Number of stored values (`n + 1`), or 0 for NULL.
///
/// # Safety
/// `series` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_series_len(series: *const SpSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.values().len())
}

/// Copies up to `cap` values into `buf`.
///
/// # Safety
/// `series` must be a live handle and `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn sp_series_copy(series: *const SpSeries, buf: *mut f64, cap: usize) -> SpStatus {
    guard(|| {
        let (Some(s), false) = (series.as_ref(), buf.is_null()) else {
            return Err(null());
        };
        let v = s.0.values();
        let k = v.len().min(cap);
        std::slice::from_raw_parts_mut(buf, k).copy_from_slice(&v[..k]);
        Ok(())
    })
}

/// # Safety
/// `series` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_series_free(series: *mut SpSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// `n` responses and an `n x d` row-major regressor matrix.
///
/// # Safety
/// `y` must hold `n` doubles, `x` must hold `n * d` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_sample_new(y: *const f64, x: *const f64, n: usize, d: usize, out: *mut *mut SpSample) -> SpStatus {
    guard(|| {
        if y.is_null() || x.is_null() || out.is_null() {
            return Err(null());
        }
        let Some(cells) = n.checked_mul(d) else {
            return Err(fail(Error::InvalidParameter("n * d overflows".into())));
        };
        let ys = std::slice::from_raw_parts(y, n).to_vec();
        let xs = std::slice::from_raw_parts(x, cells);
        let rows = if d == 0 { vec![Vec::new(); n] } else { xs.chunks(d).map(<[f64]>::to_vec).collect() };
        let s = RegressionSample::new(ys, rows, Origin::Ingested { source: None }).map_err(fail)?;
        put(out, SpSample(s));
        Ok(())
    })
}

/// # Safety
/// `sample` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_sample_free(sample: *mut SpSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Threshold test. With `cvm_reps == 0` only the sup statistic is computed;
/// otherwise the integral statistic is calibrated by `cvm_reps` bridge paths.
///
/// # Safety
/// `series` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_setar_test(
    series: *const SpSeries,
    level: f64,
    cvm_reps: usize,
    seed: u64,
    out: *mut *mut SpReport,
) -> SpStatus {
    guard(|| {
        let (Some(s), false) = (series.as_ref(), out.is_null()) else {
            return Err(null());
        };
        let config = SetarTestConfig {
            statistic: if cvm_reps == 0 { StatisticChoice::Ks } else { StatisticChoice::Both },
            level,
            ..Default::default()
        };
        let cvm = if cvm_reps == 0 {
            None
        } else {
            Some(
                functional_quantiles(Functional::CvmIntegral, &dense_levels(), DEFAULT_BRIDGE_RESOLUTION, cvm_reps, seed)
                    .map_err(fail)?,
            )
        };
        let report = run_setar_test(&s.0, &config, &SetarTables { ks: None, cvm: cvm.as_ref() }).map_err(fail)?;
        put(out, SpReport(report));
        Ok(())
    })
}

/// Changepoint test. `s_points == 0` uses every `i / n`; `z_cap` bounds the
/// threshold grid per axis.
///
/// # Safety
/// `sample` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_cpt_test(
    sample: *const SpSample,
    level: f64,
    s_points: usize,
    z_cap: usize,
    reps: usize,
    seed: u64,
    out: *mut *mut SpReport,
) -> SpStatus {
    guard(|| {
        let (Some(s), false) = (sample.as_ref(), out.is_null()) else {
            return Err(null());
        };
        let config = CptConfig {
            s_grid: if s_points == 0 { TimeGrid::AllPoints } else { TimeGrid::Uniform { k: s_points } },
            z_grid: ThresholdGrid::Observed { cap: z_cap },
            reps,
            level,
            seed,
        };
        put(out, SpReport(run_cpt_test(&s.0, &config).map_err(fail)?));
        Ok(())
    })
}

/// 1 when any calibrated statistic rejects, 0 when none does, -1 for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_rejects(report: *const SpReport) -> c_int {
    report.as_ref().map_or(-1, |r| c_int::from(r.0.rejects()))
}

/// Value, critical value and p-value of statistic `index` (NaN when absent).
///
/// # Safety
/// `report` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_report_statistic(
    report: *const SpReport,
    index: usize,
    value: *mut f64,
    critical_value: *mut f64,
    p_value: *mut f64,
) -> SpStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return Err(null());
        };
        if value.is_null() || critical_value.is_null() || p_value.is_null() {
            return Err(null());
        }
        let Some(stat) = r.0.statistics.get(index) else {
            return Err(fail(Error::InvalidParameter(format!("no statistic at index {index}"))));
        };
        *value = stat.value;
        *critical_value = stat.critical_value.unwrap_or(f64::NAN);
        *p_value = stat.p_value.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Report as JSON; release with `sp_string_free`. NULL on failure.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_json(report: *const SpReport) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        null();
        return ptr::null_mut();
    };
    match serde_json::to_string(&r.0).map(CString::new) {
        Ok(Ok(c)) => c.into_raw(),
        _ => {
            set_error("report serialization failed".into());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_report_free(report: *mut SpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Distribution function of `sup |B_0|`.
#[no_mangle]
pub extern "C" fn sp_ks_cdf(x: f64) -> f64 {
    ks_cdf(x)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_ks_quantile(p: f64, out: *mut f64) -> SpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = ks_quantile(p).map_err(fail)?;
        Ok(())
    })
}
