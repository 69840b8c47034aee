#ifndef LINFBALL_H
#define LINFBALL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

// Status code returned by every fallible function.
typedef enum LfbStatus {
  LFB_STATUS_OK = 0,
  // A dimension, radius, option or buffer length was rejected.
  LFB_STATUS_INVALID_ARGUMENT = 1,
  // A required pointer argument was null.
  LFB_STATUS_NULL_POINTER = 2,
  // The root search hit its iteration limit. The result handle is still
  // produced and holds the best iterate.
  LFB_STATUS_NOT_CONVERGED = 3,
  // Input contained NaN or infinity.
  LFB_STATUS_NON_FINITE = 4,
  // Internal error or caught panic.
  LFB_STATUS_INTERNAL = 5,
} LfbStatus;

// Root-search method.
typedef enum LfbMethod {
  LFB_METHOD_NEWTON = 0,
  // Brent's method on the search function (no pruning, zero start).
  LFB_METHOD_GRF = 1,
  // Modified Steffensen iteration.
  LFB_METHOD_SRF = 2,
} LfbMethod;

// Opaque dense row-major matrix.
typedef struct LfbMatrix LfbMatrix;

// Opaque projection result.
typedef struct LfbResult LfbResult;

// Projection options; obtain defaults from [`lfb_options_default`].
typedef struct LfbOptions {
  enum LfbMethod method;
  // Stop once `|f(gamma)| <= tolerance * max(1, tau)`.
  double tolerance;
  size_t max_iter;
  // Ignored by `LFB_METHOD_GRF`.
  bool use_initial_point;
  // Ignored by `LFB_METHOD_GRF`.
  bool use_pruning;
} LfbOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Human-readable name of a status code. The string is static.
const char *lfb_status_string(enum LfbStatus status);

// Message describing the last failure on this thread, or null if none.
// Valid until the next failing call on the same thread.
const char *lfb_last_error(void);

struct LfbOptions lfb_options_default(void);

// Copies `rows * cols` row-major values into a new matrix handle.
//
// # Safety
// `data` must point to `rows * cols` readable doubles and `out` must be a
// valid pointer to writable storage for one handle.
enum LfbStatus lfb_matrix_new(size_t rows, size_t cols, const double *data, struct LfbMatrix **out);

// # Safety
// `matrix` must be null or a handle from [`lfb_matrix_new`] not yet freed.
void lfb_matrix_free(struct LfbMatrix *matrix);

// Number of rows, or 0 for a null handle.
//
// # Safety
// `matrix` must be null or a live handle.
size_t lfb_matrix_rows(const struct LfbMatrix *matrix);

// Number of columns, or 0 for a null handle.
//
// # Safety
// `matrix` must be null or a live handle.
size_t lfb_matrix_cols(const struct LfbMatrix *matrix);

// `max_m sum_i |B_mi|`, or NaN for a null handle.
//
// # Safety
// `matrix` must be null or a live handle.
double lfb_matrix_norm_linf_1(const struct LfbMatrix *matrix);

// Projects `matrix` onto `{X : sum_m max_i |X_mi| <= tau}`.
//
// `options` may be null for the defaults. On `LFB_STATUS_OK` and
// `LFB_STATUS_NOT_CONVERGED` a result handle is written to `out`; on any
// other status `*out` is set to null.
//
// # Safety
// `matrix` must be a live handle, `options` null or valid, and `out` a
// valid pointer to writable storage for one handle.
enum LfbStatus lfb_project(const struct LfbMatrix *matrix,
                           double tau,
                           const struct LfbOptions *options,
                           struct LfbResult **out);

// # Safety
// `result` must be null or a handle from [`lfb_project`] not yet freed.
void lfb_result_free(struct LfbResult *result);

// Copies the projected matrix, row-major, into `buf` of length `len`
// (which must equal rows * cols of the input).
//
// # Safety
// `result` must be a live handle and `buf` must point to `len` writable
// doubles.
enum LfbStatus lfb_result_copy_x(const struct LfbResult *result, double *buf, size_t len);

// Root `gamma*` of the search function, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double lfb_result_gamma(const struct LfbResult *result);

// # Safety
// `result` must be null or a live handle.
size_t lfb_result_iterations(const struct LfbResult *result);

// # Safety
// `result` must be null or a live handle.
size_t lfb_result_evaluations(const struct LfbResult *result);

// `|f(gamma)|` at the returned point, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double lfb_result_residual(const struct LfbResult *result);

// # Safety
// `result` must be null or a live handle.
bool lfb_result_converged(const struct LfbResult *result);

// Wall time of the projection in seconds, or NaN for a null handle.
//
// # Safety
// `result` must be null or a live handle.
double lfb_result_elapsed_seconds(const struct LfbResult *result);

// Percentage of rows of the projection with a nonzero entry.
//
// # Safety
// `result` must be null or a live handle.
double lfb_result_sparsity_percent(const struct LfbResult *result);

// Projects the vector `u` of length `n` onto the ℓ1 ball of `radius`,
// writing the result to `out` (which may alias `u`). `threshold` may be
// null; otherwise it receives the soft-threshold that was applied.
//
// # Safety
// `u` must point to `n` readable doubles and `out` to `n` writable ones.
enum LfbStatus lfb_project_l1(const double *u,
                              size_t n,
                              double radius,
                              double *out,
                              double *threshold);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINFBALL_H */
