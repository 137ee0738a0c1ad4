#ifndef SQZMIRROR_H
#define SQZMIRROR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SqzStatus {
  SQZ_STATUS_OK = 0,
  SQZ_STATUS_NULL_POINTER = 1,
  SQZ_STATUS_INVALID_ARGUMENT = 2,
  SQZ_STATUS_INVALID_PARAMETER = 3,
  SQZ_STATUS_UNSTABLE = 4,
  SQZ_STATUS_NUMERIC = 5,
  SQZ_STATUS_UNPHYSICAL = 6,
  SQZ_STATUS_BUFFER_TOO_SMALL = 7,
  SQZ_STATUS_INTERNAL = 8,
} SqzStatus;

typedef enum SqzPhase {
  SQZ_PHASE_PLUS = 0,
  SQZ_PHASE_MINUS = 1,
  SQZ_PHASE_AVERAGE = 2,
} SqzPhase;

typedef enum SqzModel {
  SQZ_MODEL_REDUCED3 = 0,
  SQZ_MODEL_REDUCED10 = 1,
  SQZ_MODEL_REDUCED_ANALYTIC = 2,
  SQZ_MODEL_FULL6 = 3,
} SqzModel;

/**
 * Opaque parameter set.
 */
typedef struct SqzParams SqzParams;

/**
 * Opaque sampled trajectory.
 */
typedef struct SqzTrajectory SqzTrajectory;

/**
 * Mirror observables at one time or in the steady state.
 */
typedef struct SqzObservables {
  double e_n;
  double dp2_minus;
  double dq2_minus;
  double theta;
  double n_phonon[2];
  double nu_tilde[2];
  double min_symplectic;
} SqzObservables;

/**
 * Steady-state observables plus the entanglement criterion.
 */
typedef struct SqzSteadyState {
  struct SqzObservables observables;
  double threshold;
  bool entangled;
} SqzSteadyState;

typedef struct SqzOptimalSqueezing {
  double r_numeric;
  double dp2_min;
  /**
   * NaN when the stationarity condition has no solution.
   */
  double r_formula;
  bool at_boundary;
} SqzOptimalSqueezing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *sqz_last_error(void);

/**
 * Baseline parameter set; release with [`sqz_params_free`].
 */
struct SqzParams *sqz_params_new_baseline(void);

/**
 * # Safety
 * `p` must come from [`sqz_params_new_baseline`] and not be used afterwards.
 */
void sqz_params_free(struct SqzParams *p);

/**
 * Sets a field by name. The full set is validated by the compute calls.
 *
 * # Safety
 * `p` must be a live handle and `name` a NUL-terminated string.
 */
enum SqzStatus sqz_params_set(struct SqzParams *p, const char *name, double value);

/**
 * # Safety
 * `p` must be a live handle, `name` a NUL-terminated string and `out` writable.
 */
enum SqzStatus sqz_params_get(const struct SqzParams *p, const char *name, double *out);

/**
 * Steady state of the adiabatically eliminated model.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SqzStatus sqz_reduced_steady_state(const struct SqzParams *p,
                                        enum SqzPhase ph,
                                        struct SqzSteadyState *out);

/**
 * Steady state of the cavity-plus-mirrors model.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SqzStatus sqz_full_steady_state(const struct SqzParams *p,
                                     enum SqzPhase ph,
                                     bool single_mirror,
                                     struct SqzSteadyState *out);

/**
 * Squeezing degree minimizing the steady relative-momentum variance.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SqzStatus sqz_optimal_squeezing(const struct SqzParams *p,
                                     double tol,
                                     struct SqzOptimalSqueezing *out);

/**
 * Logarithmic negativity of a two-mode covariance given as 16 row-major
 * entries in `(x1, p1, x2, p2)` order.
 *
 * # Safety
 * `v` must point to 16 readable doubles and `out` be writable.
 */
enum SqzStatus sqz_log_negativity(const double *v, double *out);

/**
 * Symplectic eigenvalues, ascending, of an `n_modes`-mode covariance given
 * as `(2 n_modes)²` row-major entries.
 *
 * # Safety
 * `v` must point to `(2 n_modes)²` readable doubles and `out` to `out_len`
 * writable doubles.
 */
enum SqzStatus sqz_symplectic_eigenvalues(const double *v,
                                          size_t n_modes,
                                          double *out,
                                          size_t out_len);

/**
 * Evolves from the thermal state to `t_end` seconds with `h · rate ≤
 * step_ratio` and about `samples` samples. Release with
 * [`sqz_trajectory_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SqzStatus sqz_evolve(const struct SqzParams *p,
                          enum SqzModel m,
                          double t_end,
                          double step_ratio,
                          size_t samples,
                          struct SqzTrajectory **out);

/**
 * # Safety
 * `t` must come from [`sqz_evolve`] and not be used afterwards.
 */
void sqz_trajectory_free(struct SqzTrajectory *t);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t sqz_trajectory_len(const struct SqzTrajectory *t);

/**
 * Time and observables of sample `k`.
 *
 * # Safety
 * `t` must be a live handle; `time` and `out` must be writable.
 */
enum SqzStatus sqz_trajectory_sample(const struct SqzTrajectory *t,
                                     size_t k,
                                     double *time,
                                     struct SqzObservables *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQZMIRROR_H */
