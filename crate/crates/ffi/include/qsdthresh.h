#ifndef QSDTHRESH_H
#define QSDTHRESH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every entry point.
 */
typedef enum QsdStatus {
  QSD_STATUS_OK = 0,
  QSD_STATUS_NULL_POINTER = 1,
  QSD_STATUS_INVALID_INPUT = 2,
  /**
   * `S` or the reduced pair is not positive definite.
   */
  QSD_STATUS_NOT_DEFINITE = 3,
  /**
   * The threshold discards every direction.
   */
  QSD_STATUS_EMPTY_THRESHOLD = 4,
  /**
   * A bound's hypothesis fails for the given arguments.
   */
  QSD_STATUS_HYPOTHESIS_VIOLATED = 5,
  QSD_STATUS_PARSE = 6,
  QSD_STATUS_IO = 7,
  /**
   * Output buffer too small; the required length is still written.
   */
  QSD_STATUS_BUFFER_TOO_SMALL = 8,
  QSD_STATUS_PANIC = 9,
} QsdStatus;

/**
 * Opaque handle to a Hermitian pair `(H, S)`.
 */
typedef struct QsdPair QsdPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a pair from row-major `n * n` arrays. `h_im` and `s_im` may be
 * null. Both matrices must be Hermitian to within `1e-12` of their largest
 * entry. On success `*out` owns a handle released by [`qsd_pair_free`].
 *
 * # Safety
 * Non-null array pointers must reference `n * n` readable doubles and
 * `out` must be writable.
 */
enum QsdStatus qsd_pair_new(size_t n,
                            const double *h_re,
                            const double *h_im,
                            const double *s_re,
                            const double *s_im,
                            struct QsdPair **out);

/**
 * Parses a pair from the JSON document written by `qsdthresh pair export`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum QsdStatus qsd_pair_from_json(const char *json, struct QsdPair **out);

/**
 * Noiseless projected pair of the periodic transverse-field Ising chain
 * with `l` spins and field `g`, on the grid `t_j = j dt`, `j < n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsdStatus qsd_pair_tfim(size_t l, double g, size_t n, double dt, struct QsdPair **out);

/**
 * Releases a handle. Null is a no-op.
 *
 * # Safety
 * `pair` must come from this library and not be freed twice.
 */
void qsd_pair_free(struct QsdPair *pair);

/**
 * Dimension of the pair, or 0 for a null handle.
 *
 * # Safety
 * `pair` must be null or a live handle.
 */
size_t qsd_pair_dim(const struct QsdPair *pair);

/**
 * Spectral norm of `S`.
 *
 * # Safety
 * `pair` must be a live handle and `out` writable.
 */
enum QsdStatus qsd_pair_norm_s(const struct QsdPair *pair, double *out);

/**
 * Least eigenvalue of the pair projected onto the eigenvectors of `S`
 * above `epsilon`. `out_kept` may be null.
 *
 * # Safety
 * `pair` must be a live handle, `out_e0` writable, `out_kept` null or
 * writable.
 */
enum QsdStatus qsd_threshold_solve(const struct QsdPair *pair,
                                   double epsilon,
                                   double *out_e0,
                                   size_t *out_kept);

/**
 * Automatic threshold choice: lowers the threshold from `epsilon0` through
 * the eigenvalues of `S` until the energy jumps by a relative amount above
 * `r`, and reports the last accepted threshold and energy.
 *
 * # Safety
 * `pair` must be a live handle and both outputs writable.
 */
enum QsdStatus qsd_auto_threshold(const struct QsdPair *pair,
                                  double epsilon0,
                                  double r,
                                  double *out_epsilon,
                                  double *out_e);

/**
 * All eigenvalues of the definite pair, ascending. Writes the count to
 * `out_len`; if `capacity` is short, returns `BufferTooSmall` without
 * touching `values`.
 *
 * # Safety
 * `pair` must be a live handle, `values` null or valid for `capacity`
 * doubles, `out_len` writable.
 */
enum QsdStatus qsd_gen_eig_values(const struct QsdPair *pair,
                                  double *values,
                                  size_t capacity,
                                  size_t *out_len);

/**
 * Eigenangle perturbation bound `asin(chi / c)` for a pair with Crawford
 * number `c` under a perturbation of joint size `chi`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsdStatus qsd_stewart_bound(double chi, double crawford, double *out);

/**
 * Simplified a-priori energy error bound for noiseless QSD with `2k + 1`
 * symmetric time steps.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsdStatus qsd_a_priori_bound(double delta_e_range,
                                  double delta_e1,
                                  double gamma0_sq,
                                  size_t k,
                                  double *out);

/**
 * Energy error caused by thresholding alone.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsdStatus qsd_thresholding_only_bound(double delta_e,
                                           double epsilon,
                                           double c0_norm,
                                           double *out);

/**
 * Change of the best rank-`m` approximation under a perturbation with
 * spectral norm `delta_spec` and unitarily invariant norm `delta_qui`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsdStatus qsd_low_rank_stability_bound(double lambda_m,
                                            double lambda_m1,
                                            double delta_spec,
                                            double delta_qui,
                                            size_t n,
                                            double *out);

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call into the library on this thread.
 */
const char *qsd_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qsd_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSDTHRESH_H */
