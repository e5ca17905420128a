#ifndef SEQPROC_H
#define SEQPROC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_DEGENERATE_DATA = 3,
  SP_STATUS_FACTORIZATION = 4,
  SP_STATUS_NUMERIC = 5,
  SP_STATUS_INTERNAL = 6,
} SpStatus;

typedef struct SpReport SpReport;

/**
 * Responses with `d`-dimensional regressors.
 */
typedef struct SpSample SpSample;

/**
 * Observations `Y_0, ..., Y_n`.
 */
typedef struct SpSeries SpSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *sp_last_error(void);

/**
 * Wraps `len >= 2` values `Y_0..Y_{len-1}`.
 *
 * # Safety
 * `values` must point to `len` readable doubles and `out` must be writable.
 */
enum SpStatus sp_series_new(const double *values, size_t len, struct SpSeries **out);

/**
 * Two-regime threshold series with gaussian innovations of scale `sigma`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SpStatus sp_series_gen_setar(size_t n,
                                  double mu1,
                                  double mu2,
                                  double threshold,
                                  double sigma,
                                  uint64_t seed,
                                  struct SpSeries **out);

/**
 * Number of stored values (`n + 1`), or 0 for NULL.
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t sp_series_len(const struct SpSeries *series);

/**
 * Copies up to `cap` values into `buf`.
 *
 * # Safety
 * `series` must be a live handle and `buf` must hold `cap` doubles.
 */
enum SpStatus sp_series_copy(const struct SpSeries *series, double *buf, size_t cap);

/**
 * # Safety
 * `series` must be NULL or a handle not yet freed.
 */
void sp_series_free(struct SpSeries *series);

/**
 * `n` responses and an `n x d` row-major regressor matrix.
 *
 * # Safety
 * `y` must hold `n` doubles, `x` must hold `n * d` doubles, `out` must be writable.
 */
enum SpStatus sp_sample_new(const double *y,
                            const double *x,
                            size_t n,
                            size_t d,
                            struct SpSample **out);

/**
 * # Safety
 * `sample` must be NULL or a handle not yet freed.
 */
void sp_sample_free(struct SpSample *sample);

/**
 * Threshold test. With `cvm_reps == 0` only the sup statistic is computed;
 * otherwise the integral statistic is calibrated by `cvm_reps` bridge paths.
 *
 * # Safety
 * `series` must be a live handle and `out` must be writable.
 */
enum SpStatus sp_setar_test(const struct SpSeries *series,
                            double level,
                            size_t cvm_reps,
                            uint64_t seed,
                            struct SpReport **out);

/**
 * Changepoint test. `s_points == 0` uses every `i / n`; `z_cap` bounds the
 * threshold grid per axis.
 *
 * # Safety
 * `sample` must be a live handle and `out` must be writable.
 */
enum SpStatus sp_cpt_test(const struct SpSample *sample,
                          double level,
                          size_t s_points,
                          size_t z_cap,
                          size_t reps,
                          uint64_t seed,
                          struct SpReport **out);

/**
 * 1 when any calibrated statistic rejects, 0 when none does, -1 for NULL.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
int sp_report_rejects(const struct SpReport *report);

/**
 * Value, critical value and p-value of statistic `index` (NaN when absent).
 *
 * # Safety
 * `report` must be a live handle; the out pointers must be writable.
 */
enum SpStatus sp_report_statistic(const struct SpReport *report,
                                  size_t index,
                                  double *value,
                                  double *critical_value,
                                  double *p_value);

/**
 * Report as JSON; release with `sp_string_free`. NULL on failure.
 *
 * # Safety
 * `report` must be NULL or a live handle.
 */
char *sp_report_json(const struct SpReport *report);

/**
 * # Safety
 * `report` must be NULL or a handle not yet freed.
 */
void sp_report_free(struct SpReport *report);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void sp_string_free(char *s);

/**
 * Distribution function of `sup |B_0|`.
 */
double sp_ks_cdf(double x);

/**
 * # Safety
 * `out` must be writable.
 */
enum SpStatus sp_ks_quantile(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEQPROC_H */
