#ifndef AR_RUL_H
#define AR_RUL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ArRulStatus {
  AR_RUL_STATUS_OK = 0,
  // A required pointer argument was null.
  AR_RUL_STATUS_NULL_ARG = 1,
  // An argument was out of range or not valid UTF-8.
  AR_RUL_STATUS_INVALID_ARG = 2,
  // A file could not be read or a data directory was incomplete.
  AR_RUL_STATUS_IO = 3,
  // A file had the wrong structure or unparsable content.
  AR_RUL_STATUS_FORMAT = 4,
  // Inputs were inconsistent (shapes, geometry, missing labels).
  AR_RUL_STATUS_CONTRACT = 5,
  AR_RUL_STATUS_CONFIG = 6,
  AR_RUL_STATUS_STATE = 7,
  // A Rust panic was caught at the boundary.
  AR_RUL_STATUS_PANIC = 8,
} ArRulStatus;

// How the HI window is seeded at each segment start of a rollout.
typedef enum ArRulInit {
  // Ones for the first segment, then the last `k` predictions.
  AR_RUL_INIT_CARRYOVER = 0,
  // Ones at every segment start.
  AR_RUL_INIT_ONES = 1,
  // True labels; needs a bearing with an FPT set.
  AR_RUL_INIT_TEACHER = 2,
} ArRulInit;

// One normalized bearing record, optionally labelled.
typedef struct ArRulBearing ArRulBearing;

// A finished prediction curve.
typedef struct ArRulCurve ArRulCurve;

// A trained network loaded from a model directory.
typedef struct ArRulModel ArRulModel;

typedef struct ArRulMetrics {
  double rmse;
  double mae;
  double score;
  size_t n;
} ArRulMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none failed.
// The pointer stays valid until the next failing call on the same thread.
const char *ar_rul_last_error(void);

// Library version as a static NUL-terminated string.
const char *ar_rul_version(void);

// Loads `model.toml` and `model.ckpt` from the directory `dir`.
//
// # Safety
// `dir` must be a NUL-terminated string and `out` a writable pointer.
enum ArRulStatus ar_rul_model_load(const char *dir, struct ArRulModel **out);

// # Safety
// `model` must come from [`ar_rul_model_load`] and not be used afterwards.
// Null is ignored.
void ar_rul_model_free(struct ArRulModel *model);

// Window size `k` of the model.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_model_window_size(const struct ArRulModel *model, size_t *out);

// Points per acquisition `S` the model expects.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_model_points(const struct ArRulModel *model, size_t *out);

// One inference step. `block` holds `2k * S` values: row `2j` is the
// horizontal signal of the window's `j`-th acquisition and row `2j + 1` the
// vertical one. `hi_window` holds the `k` most recent HI values, oldest
// first.
//
// # Safety
// `block` must point to `block_len` doubles, `hi_window` to `k` doubles and
// `out` must be writable.
enum ArRulStatus ar_rul_model_step(struct ArRulModel *model,
                                   const double *block,
                                   size_t block_len,
                                   const double *hi_window,
                                   size_t k,
                                   double *out);

// Loads a native CSV bearing (with its JSON sidecar) and normalizes it.
//
// # Safety
// `csv` must be a NUL-terminated string and `out` writable.
enum ArRulStatus ar_rul_bearing_load_native(const char *csv, struct ArRulBearing **out);

// Loads a PHM2012 bearing directory of `acc_*.csv` files and normalizes it.
//
// # Safety
// `dir` must be a NUL-terminated string and `out` writable.
enum ArRulStatus ar_rul_bearing_load_phm2012(const char *dir, struct ArRulBearing **out);

// # Safety
// `bearing` must come from a load function and not be used afterwards.
// Null is ignored.
void ar_rul_bearing_free(struct ArRulBearing *bearing);

// Number of acquisitions.
//
// # Safety
// `bearing` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_bearing_len(const struct ArRulBearing *bearing, size_t *out);

// FPT index by the 3σ rule on RMS: the baseline is the first
// `baseline_count` acquisitions and degradation needs `consecutive`
// exceedances in a row.
//
// # Safety
// `bearing` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_bearing_detect_fpt(const struct ArRulBearing *bearing,
                                           size_t baseline_count,
                                           size_t consecutive,
                                           size_t *out);

// Attaches piecewise HI labels with the given FPT index.
//
// # Safety
// `bearing` must be a live handle.
enum ArRulStatus ar_rul_bearing_set_fpt(struct ArRulBearing *bearing, size_t fpt_index);

// FPT index of a PHM2012 bearing from the built-in table (`"B1-3"`,
// `"Bearing1_3"` and similar spellings), at a 10 s sampling period.
//
// # Safety
// `id` must be a NUL-terminated string and `out` writable.
enum ArRulStatus ar_rul_fpt_table_index(const char *id, size_t *out);

// Rolls the model over the whole bearing split into `n_segments` segments.
//
// # Safety
// `model` and `bearing` must be live handles and `out` writable.
enum ArRulStatus ar_rul_rollout(struct ArRulModel *model,
                                const struct ArRulBearing *bearing,
                                size_t n_segments,
                                enum ArRulInit init,
                                struct ArRulCurve **out);

// # Safety
// `curve` must come from [`ar_rul_rollout`] and not be used afterwards.
// Null is ignored.
void ar_rul_curve_free(struct ArRulCurve *curve);

// Number of predictions; prediction `i` is the HI of acquisition `i + k`.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_curve_len(const struct ArRulCurve *curve, size_t *out);

// Copies the predictions into `buf`, which must hold exactly the curve
// length.
//
// # Safety
// `curve` must be a live handle and `buf` must point to `len` writable
// doubles.
enum ArRulStatus ar_rul_curve_copy(const struct ArRulCurve *curve, double *buf, size_t len);

// RMSE, MAE and score of a curve against its labels.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum ArRulStatus ar_rul_curve_metrics(const struct ArRulCurve *curve, struct ArRulMetrics *out);

// # Safety
// `pred` and `truth` must each point to `len` doubles and `out` be writable.
enum ArRulStatus ar_rul_rmse(const double *pred, const double *truth, size_t len, double *out);

// # Safety
// `pred` and `truth` must each point to `len` doubles and `out` be writable.
enum ArRulStatus ar_rul_mae(const double *pred, const double *truth, size_t len, double *out);

// Asymmetric score with `E = truth - pred`, summed over all points.
//
// # Safety
// `pred` and `truth` must each point to `len` doubles and `out` be writable.
enum ArRulStatus ar_rul_score(const double *pred, const double *truth, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AR_RUL_H */
