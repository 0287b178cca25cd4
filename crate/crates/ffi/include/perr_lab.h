#ifndef PERR_LAB_H
#define PERR_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Call outcome. `OK` means the out-parameters were written; the two
 * `ESTIMATE_*` codes are the estimators' in-band failure markers; everything
 * else is an error and leaves the out-parameters untouched.
 */
typedef enum {
  PERR_STATUS_OK = 0,
  /**
   * A denominator quantity of the requested estimator is zero.
   */
  PERR_STATUS_ESTIMATE_UNDEFINED = 1,
  /**
   * A required subgroup of the cohort is empty.
   */
  PERR_STATUS_ESTIMATE_EMPTY = 2,
  PERR_STATUS_NULL_ARGUMENT = 3,
  PERR_STATUS_INVALID_UTF8 = 4,
  PERR_STATUS_IO = 5,
  PERR_STATUS_PARSE = 6,
  PERR_STATUS_VALIDATION = 7,
  /**
   * More than 10% of bootstrap resamples produced no estimate.
   */
  PERR_STATUS_BOOTSTRAP_FAILURES = 8,
  PERR_STATUS_INTERNAL = 9,
} PerrStatus;

/**
 * Estimator selector for [`perr_cohort_estimate`] and [`perr_bootstrap_ci`].
 */
typedef enum {
  PERR_ESTIMATOR_PERR_PREV = 0,
  PERR_ESTIMATOR_PERR_COMP = 1,
  PERR_ESTIMATOR_RR = 2,
} PerrEstimator;

/**
 * An opaque loaded cohort.
 */
typedef struct PerrCohort PerrCohort;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Reads a cohort CSV (header `id,x,y1,m2,y2`) into a new handle.
 *
 * On `PERR_STATUS_OK`, `*out_cohort` owns the cohort and must be released
 * with [`perr_cohort_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated C string; `out_cohort` must point to
 * writable storage for one pointer.
 */
PerrStatus perr_cohort_read(const char *path, PerrCohort **out_cohort);

/**
 * Releases a cohort handle. Null is a no-op; a handle must not be used
 * after it is freed.
 *
 * # Safety
 * `cohort` must be null or a pointer returned by [`perr_cohort_read`] that
 * has not already been freed.
 */
void perr_cohort_free(PerrCohort *cohort);

/**
 * Number of records in the cohort; 0 for a null handle.
 *
 * # Safety
 * `cohort` must be null or a live handle from [`perr_cohort_read`].
 */
size_t perr_cohort_len(const PerrCohort *cohort);

/**
 * Computes one estimator. Writes the value on `PERR_STATUS_OK`; the in-band
 * failure markers come back as `PERR_STATUS_ESTIMATE_UNDEFINED` /
 * `PERR_STATUS_ESTIMATE_EMPTY`.
 *
 * # Safety
 * `cohort` must be a live handle; `out_value` must point to writable
 * storage for one double.
 */
PerrStatus perr_cohort_estimate(const PerrCohort *cohort,
                                PerrEstimator estimator,
                                double *out_value);

/**
 * Percentile-bootstrap confidence interval for one estimator over case
 * resampling of whole records. `n_resamples` must be at least 100 and
 * `level` in (0.5, 1). The resampling stream is derived from `seed` and the
 * estimator, so identical inputs give identical intervals.
 *
 * # Safety
 * `cohort` must be a live handle; the three out-pointers must each point to
 * writable storage (`out_n_failed` may be null if the count is not wanted).
 */
PerrStatus perr_bootstrap_ci(const PerrCohort *cohort,
                             PerrEstimator estimator,
                             uint32_t n_resamples,
                             double level,
                             uint64_t seed,
                             double *out_lower,
                             double *out_upper,
                             uint32_t *out_n_failed);

/**
 * Runs the experiment grid described by a JSON config (same schema as the
 * CLI) and writes the results CSV to `out_csv_path`. `workers` = 0 uses one
 * worker per core.
 *
 * # Safety
 * Both strings must be NUL-terminated and valid for the call.
 */
PerrStatus perr_simulate_json(const char *config_json, const char *out_csv_path, size_t workers);

/**
 * Exact asymptotic estimator values for one grid cell of a JSON config.
 * An estimand whose population denominator vanishes is written as NaN.
 *
 * # Safety
 * `config_json` must be a NUL-terminated C string; the out-pointers must
 * point to writable storage for one double each.
 */
PerrStatus perr_oracle_json(const char *config_json,
                            uint32_t scenario_id,
                            double dropout_target,
                            double *out_perr_prev,
                            double *out_perr_comp,
                            double *out_rr);

/**
 * Static description of a status code; never null.
 */
const char *perr_status_message(PerrStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERR_LAB_H */
