#ifndef BANDEX_H
#define BANDEX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum bx_status {
  BX_STATUS_OK = 0,
  BX_STATUS_NULL_POINTER = 1,
  BX_STATUS_INVALID_ARGUMENT = 2,
  BX_STATUS_CONTRACT_VIOLATION = 3,
  BX_STATUS_NO_CONVERGENCE = 4,
  BX_STATUS_DIVERGED = 5,
  BX_STATUS_IO = 6,
  BX_STATUS_FORMAT = 7,
  BX_STATUS_INTERNAL = 8,
  BX_STATUS_PANIC = 9,
} bx_status;

typedef enum bx_stop_reason {
  BX_STOP_REASON_MAX_ITERS = 0,
  BX_STOP_REASON_RESIDUAL_TOL = 1,
  BX_STOP_REASON_DIVERGED = 2,
} bx_stop_reason;

// Opaque measured signal with its weighted regions.
typedef struct bx_problem bx_problem;

// Opaque iteration report.
typedef struct bx_report bx_report;

// Opaque spectral support.
typedef struct bx_support bx_support;

// Iteration controls for [`bx_run`]. `regularized == false` ignores `mu`
// and `tau`.
typedef struct bx_run_options {
  bool regularized;
  double mu;
  double tau;
  size_t max_iters;
  double residual_tol;
  size_t record_every;
} bx_run_options;

// One recorded iteration. Absent values are NaN.
typedef struct bx_record {
  size_t iteration;
  double nmse_db;
  double residual;
  double contraction;
} bx_record;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *bx_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *bx_version(void);

// Centered box support with `half_bandwidth[a]` bins either side of DC on
// each axis.
//
// # Safety
// `dims` and `half_bandwidth` must point to `ndim` values; `out` must be
// writable.
enum bx_status bx_support_lowpass(const size_t *dims,
                                  const size_t *half_bandwidth,
                                  size_t ndim,
                                  struct bx_support **out);

// Number of in-band bins, or 0 for a null handle.
//
// # Safety
// `support` must be null or a live handle.
size_t bx_support_count(const struct bx_support *support);

// # Safety
// `support` must be null or a handle not yet freed.
void bx_support_free(struct bx_support *support);

// Measurement problem on the support's grid. Region `m` is the box with
// corner `corners[m*ndim..]` and extent `extents[m*ndim..]`. `weights` may
// be null for uniform weights. `field` holds the full grid signal; only its
// values inside the regions are kept.
//
// # Safety
// Pointers must reference arrays of the stated lengths; `out` must be
// writable.
enum bx_status bx_problem_new(const struct bx_support *support,
                              const size_t *corners,
                              const size_t *extents,
                              size_t n_regions,
                              const double *weights,
                              const double *field,
                              size_t field_len,
                              struct bx_problem **out);

// # Safety
// `problem` must be null or a handle not yet freed.
void bx_problem_free(struct bx_problem *problem);

// Unregularized defaults: 1000 iterations, no residual stop, every step
// recorded.
struct bx_run_options bx_run_options_default(void);

// Runs the iteration. `truth` (nullable, `truth_len` samples) enables the
// NMSE column. On [`BxStatus::Diverged`] `*out` still receives the partial
// report.
//
// # Safety
// `support` and `problem` must be live handles on the same grid; `out`
// must be writable.
enum bx_status bx_run(const struct bx_support *support,
                      const struct bx_problem *problem,
                      struct bx_run_options options,
                      const double *truth,
                      size_t truth_len,
                      struct bx_report **out);

// # Safety
// `report` must be null or a handle not yet freed.
void bx_report_free(struct bx_report *report);

// # Safety
// `report` must be null or a live handle.
size_t bx_report_iterations(const struct bx_report *report);

// # Safety
// `report` must be null or a live handle.
size_t bx_report_record_count(const struct bx_report *report);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum bx_status bx_report_stop_reason(const struct bx_report *report, enum bx_stop_reason *out);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum bx_status bx_report_record(const struct bx_report *report,
                                size_t index,
                                struct bx_record *out);

// Copies the final iterate into `out`, which must hold exactly the grid's
// sample count.
//
// # Safety
// `report` must be a live handle; `out` must have room for `len` values.
enum bx_status bx_report_copy_signal(const struct bx_report *report, double *out, size_t len);

// Direct solve over the bandlimited subspace: least squares when
// `mu == 0`, Tikhonov otherwise. Writes the solution into `out` (`len`
// values) and the normal-matrix condition number into `condition`
// (nullable).
//
// # Safety
// Handles must be live; `out` must have room for `len` values.
enum bx_status bx_oracle(const struct bx_support *support,
                         const struct bx_problem *problem,
                         double mu,
                         double *out,
                         size_t len,
                         double *condition);

// NMSE in dB of `estimate` against `truth`, both `len` samples.
// Exact agreement yields negative infinity.
//
// # Safety
// Both arrays must hold `len` values; `out` must be writable.
enum bx_status bx_nmse(const double *truth, const double *estimate, size_t len, double *out);

// Writes `values` (row-major, `ndim` axes) as an NDSIG file.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; arrays must hold the
// stated counts (`values`: product of `dims`).
enum bx_status bx_write_ndsig(const char *path,
                              const size_t *dims,
                              size_t ndim,
                              const double *values);

// Reads an NDSIG file. Writes the axis count to `ndim`, up to `dims_cap`
// axis lengths to `dims`, and, when `values_cap` is large enough, the
// samples to `values`. Call with zero capacities to query sizes; the
// sample count goes to `len`.
//
// # Safety
// `path` must be NUL-terminated; output arrays must hold their capacities.
enum bx_status bx_read_ndsig(const char *path,
                             size_t *dims,
                             size_t dims_cap,
                             size_t *ndim,
                             double *values,
                             size_t values_cap,
                             size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BANDEX_H */
