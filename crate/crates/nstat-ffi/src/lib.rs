//! C ABI for the normality-testing library.
//!
//! Conventions:
//! * every function returns an [`NstatStatus`]; outputs go through pointers;
//! * missing one-sided thresholds are reported as NaN;
//! * calibration tables are opaque handles created by `nstat_calibration_run`
//!   or `nstat_calibration_load` and released with `nstat_calibration_free`;
//! * on any non-OK status, `nstat_last_error_message` returns a
//!   human-readable description for the calling thread.
//!
//! The generated header lives at `include/nstat.h`.

use std::cell::RefCell;
use std::ffi::CStr;
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_int, size_t};

use nstat::{
    anderson_darling, calibrate_null, jarque_bera, n1_statistic, n2_statistic, n_statistic,
    shapiro_wilk, CriticalValues, Error, EstimatorConfig, Sample, Side, StatKind,
};

/// Result of every FFI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NstatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ComputationError = 3,
    IoError = 4,
    MissingCalibration = 5,
    Panic = 6,
}

/// Rejection side of the N test.
#[repr(C)]
#[derive(Clone, Copy)]
pub enum NstatSide {
    Left = 0,
    Right = 1,
    TwoSided = 2,
}

/// Estimator convention.
#[repr(C)]
#[derive(Clone, Copy)]
pub enum NstatConvention {
    /// Floor-index blocks at the exact ratio with 1/m denominators (the
    /// formal definition; use for asymptotic critical values).
    FloorExact = 0,
    /// Type-7 interpolated membership at the rounded 20/60/20 ratio with
    /// unbiased denominators (the published-table convention).
    Type7Rounded = 1,
}

/// Analytic constants of the framework.
#[repr(C)]
pub struct NstatConstants {
    /// Tail probability of the balanced split, about 0.19809.
    pub q_tilde: f64,
    /// Negative root defining it.
    pub q_tilde_root: f64,
    /// Normalizing constant of the N statistic, about 1.7885.
    pub rho: f64,
    /// Lower-tail to overall dispersion ratio at the rounded split.
    pub lambda: f64,
}

/// Outcome of a hypothesis test.
#[repr(C)]
pub struct NstatTestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Reject when the statistic falls below this (NaN when unused).
    pub threshold_below: f64,
    /// Reject when the statistic falls above this (NaN when unused).
    pub threshold_above: f64,
    /// 1 when normality is rejected at the requested level.
    pub reject: c_int,
}

/// Opaque calibration handle.
pub struct NstatCalibration(nstat::NullCalibration);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> NstatStatus {
    match err {
        Error::MissingCalibration(_) => NstatStatus::MissingCalibration,
        Error::Io(_) | Error::MalformedCalibrationFile(_) | Error::Parse(_) => NstatStatus::IoError,
        Error::InvalidParameter(_) | Error::InvalidPartition { .. } | Error::ProbabilityOutOfRange(_) => {
            NstatStatus::InvalidArgument
        }
        _ => NstatStatus::ComputationError,
    }
}

fn fail(err: Error) -> NstatStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Copies the message for the last failing call on this thread into `buf`
/// (NUL-terminated, truncating) and returns the full message length in
/// bytes. Passing a null buffer or zero capacity just queries the length.
#[no_mangle]
pub extern "C" fn nstat_last_error_message(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

fn convention_config(conv: NstatConvention) -> EstimatorConfig {
    match conv {
        NstatConvention::FloorExact => EstimatorConfig::default(),
        NstatConvention::Type7Rounded => EstimatorConfig::type7_rounded(),
    }
}

fn side_of(side: NstatSide) -> Side {
    match side {
        NstatSide::Left => Side::Left,
        NstatSide::Right => Side::Right,
        NstatSide::TwoSided => Side::TwoSided,
    }
}

// Wraps a fallible body: catches panics, stores error messages, maps to a
// status code.
fn guarded(body: impl FnOnce() -> Result<(), Error>) -> NstatStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NstatStatus::Ok,
        Ok(Err(err)) => fail(err),
        Err(_) => {
            set_error("panic inside nstat");
            NstatStatus::Panic
        }
    }
}

unsafe fn sample_from(data: *const f64, len: size_t) -> Result<Sample, Error> {
    if data.is_null() {
        return Err(Error::InvalidParameter("data pointer is null".into()));
    }
    let slice = std::slice::from_raw_parts(data, len);
    Sample::new(slice.to_vec())
}

/// Fills `out` with the analytic constants.
///
/// # Safety
/// `out` must point to writable memory for one `NstatConstants`.
#[no_mangle]
pub unsafe extern "C" fn nstat_get_constants(out: *mut NstatConstants) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let q = nstat::qtilde();
        out.write(NstatConstants {
            q_tilde: q.value,
            q_tilde_root: q.root,
            rho: nstat::rho(),
            lambda: nstat::lambda_tail(),
        });
        Ok(())
    })
}

unsafe fn eval_with_convention(
    data: *const f64,
    len: size_t,
    convention: NstatConvention,
    out: *mut f64,
    op: impl Fn(&Sample, &EstimatorConfig) -> Result<f64, Error>,
) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let sample = sample_from(data, len)?;
        let cfg = convention_config(convention);
        out.write(op(&sample, &cfg)?);
        Ok(())
    })
}

unsafe fn eval_plain(
    data: *const f64,
    len: size_t,
    out: *mut f64,
    op: impl Fn(&Sample) -> Result<f64, Error>,
) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let sample = sample_from(data, len)?;
        out.write(op(&sample)?);
        Ok(())
    })
}

/// The two-tailed conditional-variance statistic N.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_n_statistic(
    data: *const f64,
    len: size_t,
    convention: NstatConvention,
    out: *mut f64,
) -> NstatStatus {
    eval_with_convention(data, len, convention, out, n_statistic)
}

/// Left-tail statistic N1 = sqrt(n)·(s²_L - s²_M)/s².
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_n1_statistic(
    data: *const f64,
    len: size_t,
    convention: NstatConvention,
    out: *mut f64,
) -> NstatStatus {
    eval_with_convention(data, len, convention, out, n1_statistic)
}

/// Left-tail statistic N2 = sqrt(n)·(s²_L - s²_M)/s²_M.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_n2_statistic(
    data: *const f64,
    len: size_t,
    convention: NstatConvention,
    out: *mut f64,
) -> NstatStatus {
    eval_with_convention(data, len, convention, out, n2_statistic)
}

/// Jarque-Bera statistic.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_jarque_bera(
    data: *const f64,
    len: size_t,
    out: *mut f64,
) -> NstatStatus {
    eval_plain(data, len, out, jarque_bera)
}

/// Anderson-Darling A² for composite normality.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_anderson_darling(
    data: *const f64,
    len: size_t,
    out: *mut f64,
) -> NstatStatus {
    eval_plain(data, len, out, anderson_darling)
}

/// Shapiro-Wilk W.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// double.
#[no_mangle]
pub unsafe extern "C" fn nstat_shapiro_wilk(
    data: *const f64,
    len: size_t,
    out: *mut f64,
) -> NstatStatus {
    eval_plain(data, len, out, shapiro_wilk)
}

fn write_outcome(out: *mut NstatTestOutcome, outcome: &nstat::TestOutcome) {
    unsafe {
        out.write(NstatTestOutcome {
            statistic: outcome.statistic,
            p_value: outcome.p_value,
            threshold_below: outcome.region.below.unwrap_or(f64::NAN),
            threshold_above: outcome.region.above.unwrap_or(f64::NAN),
            reject: outcome.reject as c_int,
        });
    }
}

/// Runs the N test with large-sample (standard normal) critical values.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` to one writable
/// `NstatTestOutcome`.
#[no_mangle]
pub unsafe extern "C" fn nstat_n_test_asymptotic(
    data: *const f64,
    len: size_t,
    side: NstatSide,
    level: f64,
    convention: NstatConvention,
    out: *mut NstatTestOutcome,
) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let sample = sample_from(data, len)?;
        let cfg = convention_config(convention);
        let outcome = nstat::n_test(&sample, side_of(side), level, CriticalValues::Asymptotic, &cfg)?;
        write_outcome(out, &outcome);
        Ok(())
    })
}

/// Simulates the null distribution of all four statistics at sample size
/// `n` and returns a calibration handle.
///
/// # Safety
/// `out` must point to one writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn nstat_calibration_run(
    n: u64,
    reps: u64,
    seed: u64,
    convention: NstatConvention,
    out: *mut *mut NstatCalibration,
) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let cfg = convention_config(convention);
        let cal = calibrate_null(n as usize, reps as usize, seed, &StatKind::ALL, &cfg)?;
        out.write(Box::into_raw(Box::new(NstatCalibration(cal))));
        Ok(())
    })
}

unsafe fn dir_from(ptr: *const c_char) -> Result<std::path::PathBuf, Error> {
    if ptr.is_null() {
        return Err(Error::InvalidParameter("directory pointer is null".into()));
    }
    let s = CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Error::InvalidParameter("directory is not valid UTF-8".into()))?;
    Ok(std::path::PathBuf::from(s))
}

/// Persists the calibration tables (one file per statistic) into `dir`.
///
/// # Safety
/// `cal` must be a live handle and `dir` a NUL-terminated UTF-8 path.
#[no_mangle]
pub unsafe extern "C" fn nstat_calibration_save(
    cal: *const NstatCalibration,
    dir: *const c_char,
) -> NstatStatus {
    if cal.is_null() {
        set_error("calibration handle is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let dir = dir_from(dir)?;
        (*cal).0.save_dir(&dir)?;
        Ok(())
    })
}

/// Loads previously saved calibration tables for sample size `n`.
///
/// # Safety
/// `dir` must be a NUL-terminated UTF-8 path and `out` one writable handle
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn nstat_calibration_load(
    dir: *const c_char,
    n: u64,
    convention: NstatConvention,
    out: *mut *mut NstatCalibration,
) -> NstatStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let dir = dir_from(dir)?;
        let cfg = convention_config(convention);
        let cal = nstat::NullCalibration::load_dir(&dir, n as usize, cfg)?;
        out.write(Box::into_raw(Box::new(NstatCalibration(cal))));
        Ok(())
    })
}

/// Number of Monte Carlo replications behind the handle.
///
/// # Safety
/// `cal` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nstat_calibration_reps(cal: *const NstatCalibration) -> u64 {
    if cal.is_null() {
        return 0;
    }
    (*cal).0.reps() as u64
}

/// Runs the N test with thresholds from the calibration handle. The
/// convention is the one the handle was calibrated under, and the sample
/// length must match its calibrated size.
///
/// # Safety
/// `cal` must be a live handle, `data` must point to `len` readable
/// doubles, `out` to one writable `NstatTestOutcome`.
#[no_mangle]
pub unsafe extern "C" fn nstat_n_test_calibrated(
    cal: *const NstatCalibration,
    data: *const f64,
    len: size_t,
    side: NstatSide,
    level: f64,
    out: *mut NstatTestOutcome,
) -> NstatStatus {
    if cal.is_null() || out.is_null() {
        set_error("null handle or out pointer");
        return NstatStatus::NullPointer;
    }
    guarded(|| {
        let table = &(*cal).0;
        if len != table.n() {
            return Err(Error::InvalidParameter(format!(
                "sample length {len} does not match the calibrated size {}",
                table.n()
            )));
        }
        let sample = sample_from(data, len)?;
        let outcome = nstat::n_test(
            &sample,
            side_of(side),
            level,
            CriticalValues::Calibrated(table),
            &table.cfg(),
        )?;
        write_outcome(out, &outcome);
        Ok(())
    })
}

/// Releases a calibration handle. Passing null is a no-op.
///
/// # Safety
/// `cal` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn nstat_calibration_free(cal: *mut NstatCalibration) {
    if !cal.is_null() {
        drop(Box::from_raw(cal));
    }
}
