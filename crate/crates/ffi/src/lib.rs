//! C ABI for the PERR estimation library.
//!
//! The surface follows the usual opaque-handle pattern: a cohort is loaded
//! into a [`PerrCohort`] handle owned by this library and freed with
//! [`perr_cohort_free`]; every other call reports a [`PerrStatus`] and writes
//! results through out-pointers. All functions are panic-safe (a caught panic
//! reports `PERR_STATUS_INTERNAL`) and tolerate null pointers.
//!
//! The generated header lives at `include/perr_lab.h` and is refreshed on
//! every build.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use perr_lab::cohort_csv::read_cohort;
use perr_lab::config::parse_config;
use perr_lab::dgp::{calibrate_dropout_intercept, enumerate_population, Scenario, ScenarioSpec};
use perr_lab::error::Error;
use perr_lab::estimators::{
    bootstrap_ci, estimate_all, summarize_cohort, Estimator, EstimatorValue,
};
use perr_lab::harness::run_experiment;
use perr_lab::results_csv::write_results;
use perr_lab::stream::{derive_rng, DOMAIN_BOOTSTRAP};

/// Call outcome. `OK` means the out-parameters were written; the two
/// `ESTIMATE_*` codes are the estimators' in-band failure markers; everything
/// else is an error and leaves the out-parameters untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerrStatus {
    Ok = 0,
    /// A denominator quantity of the requested estimator is zero.
    EstimateUndefined = 1,
    /// A required subgroup of the cohort is empty.
    EstimateEmpty = 2,
    NullArgument = 3,
    InvalidUtf8 = 4,
    Io = 5,
    Parse = 6,
    Validation = 7,
    /// More than 10% of bootstrap resamples produced no estimate.
    BootstrapFailures = 8,
    Internal = 9,
}

/// Estimator selector for [`perr_cohort_estimate`] and [`perr_bootstrap_ci`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerrEstimator {
    PerrPrev = 0,
    PerrComp = 1,
    Rr = 2,
}

impl From<PerrEstimator> for Estimator {
    fn from(e: PerrEstimator) -> Estimator {
        match e {
            PerrEstimator::PerrPrev => Estimator::PerrPrev,
            PerrEstimator::PerrComp => Estimator::PerrComp,
            PerrEstimator::Rr => Estimator::Rr,
        }
    }
}

/// An opaque loaded cohort.
pub struct PerrCohort {
    records: Vec<perr_lab::dgp::IndividualRecord>,
}

fn status_of(err: &Error) -> PerrStatus {
    match err {
        Error::Io { .. } => PerrStatus::Io,
        Error::Parse(_) => PerrStatus::Parse,
        Error::Schema { .. } | Error::Row { .. } => PerrStatus::Parse,
        Error::TooManyFailures { .. } => PerrStatus::BootstrapFailures,
        Error::InvalidParams { .. }
        | Error::Validation { .. }
        | Error::NoSolution { .. }
        | Error::MalformedRecord { .. }
        | Error::EmptyInput(_) => PerrStatus::Validation,
        Error::ThreadPool(_) => PerrStatus::Internal,
    }
}

/// Runs `f` with panics converted to `Internal`.
fn guarded(f: impl FnOnce() -> PerrStatus) -> PerrStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(PerrStatus::Internal)
}

/// # Safety
/// `ptr` must be null or a NUL-terminated C string valid for the call.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, PerrStatus> {
    if ptr.is_null() {
        return Err(PerrStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| PerrStatus::InvalidUtf8)
}

/// Reads a cohort CSV (header `id,x,y1,m2,y2`) into a new handle.
///
/// On `PERR_STATUS_OK`, `*out_cohort` owns the cohort and must be released
/// with [`perr_cohort_free`].
///
/// # Safety
/// `path` must be a NUL-terminated C string; `out_cohort` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn perr_cohort_read(
    path: *const c_char,
    out_cohort: *mut *mut PerrCohort,
) -> PerrStatus {
    guarded(|| {
        if out_cohort.is_null() {
            return PerrStatus::NullArgument;
        }
        let path = match utf8_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match read_cohort(path) {
            Ok(records) => {
                *out_cohort = Box::into_raw(Box::new(PerrCohort { records }));
                PerrStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Releases a cohort handle. Null is a no-op; a handle must not be used
/// after it is freed.
///
/// # Safety
/// `cohort` must be null or a pointer returned by [`perr_cohort_read`] that
/// has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn perr_cohort_free(cohort: *mut PerrCohort) {
    if !cohort.is_null() {
        drop(Box::from_raw(cohort));
    }
}

/// Number of records in the cohort; 0 for a null handle.
///
/// # Safety
/// `cohort` must be null or a live handle from [`perr_cohort_read`].
#[no_mangle]
pub unsafe extern "C" fn perr_cohort_len(cohort: *const PerrCohort) -> usize {
    if cohort.is_null() {
        0
    } else {
        (*cohort).records.len()
    }
}

/// Computes one estimator. Writes the value on `PERR_STATUS_OK`; the in-band
/// failure markers come back as `PERR_STATUS_ESTIMATE_UNDEFINED` /
/// `PERR_STATUS_ESTIMATE_EMPTY`.
///
/// # Safety
/// `cohort` must be a live handle; `out_value` must point to writable
/// storage for one double.
#[no_mangle]
pub unsafe extern "C" fn perr_cohort_estimate(
    cohort: *const PerrCohort,
    estimator: PerrEstimator,
    out_value: *mut f64,
) -> PerrStatus {
    guarded(|| {
        if cohort.is_null() || out_value.is_null() {
            return PerrStatus::NullArgument;
        }
        let summary = match summarize_cohort(&(*cohort).records) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        match estimate_all(&summary).get(estimator.into()) {
            EstimatorValue::Value(v) => {
                *out_value = v;
                PerrStatus::Ok
            }
            EstimatorValue::Undefined => PerrStatus::EstimateUndefined,
            EstimatorValue::Empty => PerrStatus::EstimateEmpty,
        }
    })
}

/// Percentile-bootstrap confidence interval for one estimator over case
/// resampling of whole records. `n_resamples` must be at least 100 and
/// `level` in (0.5, 1). The resampling stream is derived from `seed` and the
/// estimator, so identical inputs give identical intervals.
///
/// # Safety
/// `cohort` must be a live handle; the three out-pointers must each point to
/// writable storage (`out_n_failed` may be null if the count is not wanted).
#[no_mangle]
pub unsafe extern "C" fn perr_bootstrap_ci(
    cohort: *const PerrCohort,
    estimator: PerrEstimator,
    n_resamples: u32,
    level: f64,
    seed: u64,
    out_lower: *mut f64,
    out_upper: *mut f64,
    out_n_failed: *mut u32,
) -> PerrStatus {
    guarded(|| {
        if cohort.is_null() || out_lower.is_null() || out_upper.is_null() {
            return PerrStatus::NullArgument;
        }
        let est: Estimator = estimator.into();
        let index = Estimator::ALL.iter().position(|e| *e == est).unwrap() as u64;
        let mut rng = derive_rng(seed, &[DOMAIN_BOOTSTRAP, index]);
        match bootstrap_ci(&(*cohort).records, est, n_resamples as usize, level, &mut rng) {
            Ok(ci) => {
                *out_lower = ci.lower;
                *out_upper = ci.upper;
                if !out_n_failed.is_null() {
                    *out_n_failed = ci.n_failed as u32;
                }
                PerrStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Runs the experiment grid described by a JSON config (same schema as the
/// CLI) and writes the results CSV to `out_csv_path`. `workers` = 0 uses one
/// worker per core.
///
/// # Safety
/// Both strings must be NUL-terminated and valid for the call.
#[no_mangle]
pub unsafe extern "C" fn perr_simulate_json(
    config_json: *const c_char,
    out_csv_path: *const c_char,
    workers: usize,
) -> PerrStatus {
    guarded(|| {
        let (config_json, out_csv_path) = match (utf8_arg(config_json), utf8_arg(out_csv_path)) {
            (Ok(c), Ok(p)) => (c, p),
            (Err(status), _) | (_, Err(status)) => return status,
        };
        let result = parse_config(config_json)
            .and_then(|config| config.to_grid())
            .and_then(|grid| run_experiment(&grid, workers))
            .and_then(|rows| write_results(&rows, out_csv_path));
        match result {
            Ok(()) => PerrStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

/// Exact asymptotic estimator values for one grid cell of a JSON config.
/// An estimand whose population denominator vanishes is written as NaN.
///
/// # Safety
/// `config_json` must be a NUL-terminated C string; the out-pointers must
/// point to writable storage for one double each.
#[no_mangle]
pub unsafe extern "C" fn perr_oracle_json(
    config_json: *const c_char,
    scenario_id: u32,
    dropout_target: f64,
    out_perr_prev: *mut f64,
    out_perr_comp: *mut f64,
    out_rr: *mut f64,
) -> PerrStatus {
    guarded(|| {
        if out_perr_prev.is_null() || out_perr_comp.is_null() || out_rr.is_null() {
            return PerrStatus::NullArgument;
        }
        let config_json = match utf8_arg(config_json) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let result = parse_config(config_json).and_then(|config| {
            let scenario = Scenario::from_id(scenario_id.try_into().unwrap_or(0))?;
            let spec = ScenarioSpec::new(scenario, dropout_target)?;
            let model = calibrate_dropout_intercept(&config.dgp, &spec)?;
            enumerate_population(&config.dgp, &spec, &model)
        });
        match result {
            Ok(pop) => {
                *out_perr_prev = pop.perr_prev.value().unwrap_or(f64::NAN);
                *out_perr_comp = pop.perr_comp.value().unwrap_or(f64::NAN);
                *out_rr = pop.rr.value().unwrap_or(f64::NAN);
                PerrStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Static description of a status code; never null.
#[no_mangle]
pub extern "C" fn perr_status_message(status: PerrStatus) -> *const c_char {
    let message: &'static CStr = match status {
        PerrStatus::Ok => c"ok",
        PerrStatus::EstimateUndefined => c"estimator undefined: a denominator quantity is zero",
        PerrStatus::EstimateEmpty => c"estimator empty: a required subgroup has no members",
        PerrStatus::NullArgument => c"null pointer argument",
        PerrStatus::InvalidUtf8 => c"string argument is not valid UTF-8",
        PerrStatus::Io => c"i/o error",
        PerrStatus::Parse => c"parse error in config or data file",
        PerrStatus::Validation => c"validation error: parameter or argument out of range",
        PerrStatus::BootstrapFailures => c"more than 10% of bootstrap resamples failed",
        PerrStatus::Internal => c"internal error",
    };
    message.as_ptr()
}
