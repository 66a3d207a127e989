#ifndef NSTAT_H
#define NSTAT_H

/* Generated by cbindgen from the nstat-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every FFI call.
typedef enum NstatStatus {
  NSTAT_STATUS_OK = 0,
  NSTAT_STATUS_NULL_POINTER = 1,
  NSTAT_STATUS_INVALID_ARGUMENT = 2,
  NSTAT_STATUS_COMPUTATION_ERROR = 3,
  NSTAT_STATUS_IO_ERROR = 4,
  NSTAT_STATUS_MISSING_CALIBRATION = 5,
  NSTAT_STATUS_PANIC = 6,
} NstatStatus;

// Estimator convention.
typedef enum NstatConvention {
  // Floor-index blocks at the exact ratio with 1/m denominators (the
  // formal definition; use for asymptotic critical values).
  NSTAT_CONVENTION_FLOOR_EXACT = 0,
  // Type-7 interpolated membership at the rounded 20/60/20 ratio with
  // unbiased denominators (the published-table convention).
  NSTAT_CONVENTION_TYPE7_ROUNDED = 1,
} NstatConvention;

// Rejection side of the N test.
typedef enum NstatSide {
  NSTAT_SIDE_LEFT = 0,
  NSTAT_SIDE_RIGHT = 1,
  NSTAT_SIDE_TWO_SIDED = 2,
} NstatSide;

// Opaque calibration handle.
typedef struct NstatCalibration NstatCalibration;

// Analytic constants of the framework.
typedef struct NstatConstants {
  // Tail probability of the balanced split, about 0.19809.
  double q_tilde;
  // Negative root defining it.
  double q_tilde_root;
  // Normalizing constant of the N statistic, about 1.7885.
  double rho;
  // Lower-tail to overall dispersion ratio at the rounded split.
  double lambda;
} NstatConstants;

// Outcome of a hypothesis test.
typedef struct NstatTestOutcome {
  double statistic;
  double p_value;
  // Reject when the statistic falls below this (NaN when unused).
  double threshold_below;
  // Reject when the statistic falls above this (NaN when unused).
  double threshold_above;
  // 1 when normality is rejected at the requested level.
  int reject;
} NstatTestOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message for the last failing call on this thread into `buf`
// (NUL-terminated, truncating) and returns the full message length in
// bytes. Passing a null buffer or zero capacity just queries the length.
size_t nstat_last_error_message(char *buf, size_t cap);

// Fills `out` with the analytic constants.
//
// # Safety
// `out` must point to writable memory for one `NstatConstants`.
enum NstatStatus nstat_get_constants(struct NstatConstants *out);

// The two-tailed conditional-variance statistic N.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_n_statistic(const double *data,
                                   size_t len,
                                   enum NstatConvention convention,
                                   double *out);

// Left-tail statistic N1 = sqrt(n)·(s²_L - s²_M)/s².
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_n1_statistic(const double *data,
                                    size_t len,
                                    enum NstatConvention convention,
                                    double *out);

// Left-tail statistic N2 = sqrt(n)·(s²_L - s²_M)/s²_M.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_n2_statistic(const double *data,
                                    size_t len,
                                    enum NstatConvention convention,
                                    double *out);

// Jarque-Bera statistic.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_jarque_bera(const double *data, size_t len, double *out);

// Anderson-Darling A² for composite normality.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_anderson_darling(const double *data, size_t len, double *out);

// Shapiro-Wilk W.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// double.
enum NstatStatus nstat_shapiro_wilk(const double *data, size_t len, double *out);

// Runs the N test with large-sample (standard normal) critical values.
//
// # Safety
// `data` must point to `len` readable doubles and `out` to one writable
// `NstatTestOutcome`.
enum NstatStatus nstat_n_test_asymptotic(const double *data,
                                         size_t len,
                                         enum NstatSide side,
                                         double level,
                                         enum NstatConvention convention,
                                         struct NstatTestOutcome *out);

// Simulates the null distribution of all four statistics at sample size
// `n` and returns a calibration handle.
//
// # Safety
// `out` must point to one writable handle pointer.
enum NstatStatus nstat_calibration_run(uint64_t n,
                                       uint64_t reps,
                                       uint64_t seed,
                                       enum NstatConvention convention,
                                       struct NstatCalibration **out);

// Persists the calibration tables (one file per statistic) into `dir`.
//
// # Safety
// `cal` must be a live handle and `dir` a NUL-terminated UTF-8 path.
enum NstatStatus nstat_calibration_save(const struct NstatCalibration *cal, const char *dir);

// Loads previously saved calibration tables for sample size `n`.
//
// # Safety
// `dir` must be a NUL-terminated UTF-8 path and `out` one writable handle
// pointer.
enum NstatStatus nstat_calibration_load(const char *dir,
                                        uint64_t n,
                                        enum NstatConvention convention,
                                        struct NstatCalibration **out);

// Number of Monte Carlo replications behind the handle.
//
// # Safety
// `cal` must be a live handle.
uint64_t nstat_calibration_reps(const struct NstatCalibration *cal);

// Runs the N test with thresholds from the calibration handle. The
// convention is the one the handle was calibrated under, and the sample
// length must match its calibrated size.
//
// # Safety
// `cal` must be a live handle, `data` must point to `len` readable
// doubles, `out` to one writable `NstatTestOutcome`.
enum NstatStatus nstat_n_test_calibrated(const struct NstatCalibration *cal,
                                         const double *data,
                                         size_t len,
                                         enum NstatSide side,
                                         double level,
                                         struct NstatTestOutcome *out);

// Releases a calibration handle. Passing null is a no-op.
//
// # Safety
// `cal` must be null or a handle not freed before.
void nstat_calibration_free(struct NstatCalibration *cal);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSTAT_H */
