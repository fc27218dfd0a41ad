#ifndef SLSGD_FFI_H
#define SLSGD_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlsDirection {
  SLS_DIRECTION_SGD = 0,
  SLS_DIRECTION_MOMENTUM = 1,
  SLS_DIRECTION_CG_POLAK_RIBIERE_PLUS = 2,
  SLS_DIRECTION_CG_FLETCHER_REEVES = 3,
  SLS_DIRECTION_ADAGRAD_DIAG = 4,
} SlsDirection;

/**
 * Result code of every fallible call.
 */
typedef enum SlsError {
  SLS_ERROR_OK = 0,
  SLS_ERROR_NULL_POINTER = 1,
  SLS_ERROR_INVALID_ARGUMENT = 2,
  SLS_ERROR_SHAPE = 3,
  SLS_ERROR_NUMERIC_DOMAIN = 4,
  SLS_ERROR_INVALID_BATCH = 5,
  SLS_ERROR_UNSATISFIABLE_SAFEGUARD = 6,
  SLS_ERROR_NON_DESCENT = 7,
  SLS_ERROR_STALL = 8,
  SLS_ERROR_INSUFFICIENT_DATA = 9,
  SLS_ERROR_UNDEFINED = 10,
  SLS_ERROR_UNSUPPORTED = 11,
  SLS_ERROR_PRECONDITION = 12,
  SLS_ERROR_CONFIG = 13,
  SLS_ERROR_IO = 14,
  SLS_ERROR_OUT_OF_RANGE = 15,
  SLS_ERROR_PANIC = 16,
} SlsError;

typedef enum SlsInitialPoint {
  SLS_INITIAL_POINT_RANDOM = 0,
  SLS_INITIAL_POINT_ZEROS = 1,
  SLS_INITIAL_POINT_ONES = 2,
  SLS_INITIAL_POINT_MINIMIZER = 3,
} SlsInitialPoint;

typedef enum SlsRunStatus {
  SLS_RUN_STATUS_CONVERGED_GRAD = 0,
  SLS_RUN_STATUS_CONVERGED_FGAP = 1,
  SLS_RUN_STATUS_MAX_ITERS = 2,
  SLS_RUN_STATUS_STALLED = 3,
} SlsRunStatus;

/**
 * A finite-sum objective.
 */
typedef struct SlsProblem SlsProblem;

/**
 * A finished run and its trajectory.
 */
typedef struct SlsRun SlsRun;

/**
 * Known constants; a `has_*` flag of false means no closed form.
 */
typedef struct SlsConstants {
  bool has_l;
  double l;
  bool has_l_max;
  double l_max;
  bool has_mu;
  double mu;
  double f_star;
} SlsConstants;

/**
 * Flat run configuration. Fill with [`sls_run_config_default`] first.
 */
typedef struct SlsRunConfig {
  enum SlsDirection direction;
  /**
   * Momentum coefficient.
   */
  double beta;
  /**
   * Adagrad floor.
   */
  double epsilon;
  /**
   * Conjugate-gradient coefficient cap.
   */
  double beta_cap;
  double c1;
  double c2;
  double gamma;
  double delta;
  double alpha_max;
  /**
   * 0 starts every search at `alpha_max`; `p > 0` starts at
   * `min(alpha_max, α_prev / δ^p)`.
   */
  uint32_t warm_increase;
  uint32_t max_backtracks;
  uint64_t max_iters;
  double grad_tol;
  double fgap_tol;
  uint64_t seed;
  uint64_t trace_every;
  uint64_t batch_size;
  enum SlsInitialPoint x0;
} SlsRunConfig;

typedef struct SlsRunSummary {
  enum SlsRunStatus status;
  uint64_t stopped_at;
  uint64_t num_records;
  uint64_t f_evals;
  uint64_t g_evals;
  bool has_final;
  double final_f;
  double final_grad_norm;
  double restart_rate;
} SlsRunSummary;

/**
 * One trajectory row; `has_full` tells whether `f_full` and
 * `grad_full_norm` were evaluated.
 */
typedef struct SlsRecord {
  uint64_t k;
  bool has_full;
  double f_full;
  double grad_full_norm;
  double f_batch;
  double g_batch_norm;
  double d_norm;
  double dtg;
  double alpha0;
  double alpha;
  uint32_t backtracks;
  bool sgr_pass;
  bool restarted;
  double f_batch_accepted;
} SlsRecord;

typedef struct SlsTheoremConstants {
  double c1;
  double c2;
  double c3;
  double rho;
  double mu;
  double l;
  double l_max;
  double gamma;
  double delta;
  double alpha_max;
} SlsTheoremConstants;

typedef struct SlsEtaReport {
  double eta;
  double sigma;
  double certified_rate;
  bool applicable;
} SlsEtaReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sls_last_error_message(void);

/**
 * Interpolating least squares with `num_components` rows in dimension
 * `dim`. `spectrum` is a spec such as `"linspace:2:4"`, or null for the
 * default.
 *
 * # Safety
 * `spectrum` is null or a NUL-terminated string; `out` is writable.
 */
enum SlsError sls_problem_least_squares(size_t num_components,
                                        size_t dim,
                                        uint64_t seed,
                                        const char *spectrum,
                                        struct SlsProblem **out);

/**
 * Separable quadratics with curvatures `scale·(1 + spread·U(−1, 1))`.
 *
 * # Safety
 * `out` is writable.
 */
enum SlsError sls_problem_quadratic(size_t num_components,
                                    size_t dim,
                                    uint64_t seed,
                                    double scale,
                                    double spread,
                                    struct SlsProblem **out);

/**
 * Nonconvex two-factor model with `hidden` outputs and `features` inputs.
 *
 * # Safety
 * `out` is writable.
 */
enum SlsError sls_problem_nonconvex(size_t num_components,
                                    size_t hidden,
                                    size_t features,
                                    uint64_t seed,
                                    struct SlsProblem **out);

/**
 * Least squares read from the text format written by the library.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is writable.
 */
enum SlsError sls_problem_from_file(const char *path, struct SlsProblem **out);

/**
 * # Safety
 * `problem` is null or a handle from an `sls_problem_*` constructor that
 * has not been freed.
 */
void sls_problem_free(struct SlsProblem *problem);

/**
 * Number of components, 0 for a null handle.
 *
 * # Safety
 * `problem` is null or a live handle.
 */
size_t sls_problem_num_components(const struct SlsProblem *problem);

/**
 * Decision-vector length, 0 for a null handle.
 *
 * # Safety
 * `problem` is null or a live handle.
 */
size_t sls_problem_dim(const struct SlsProblem *problem);

/**
 * # Safety
 * `problem` is a live handle; `out` is writable.
 */
enum SlsError sls_problem_constants(const struct SlsProblem *problem, struct SlsConstants *out);

/**
 * Copies the known minimizer into `out[0..len]`; `len` must equal the
 * dimension.
 *
 * # Safety
 * `problem` is a live handle; `out` has room for `len` values.
 */
enum SlsError sls_problem_minimizer(const struct SlsProblem *problem, double *out, size_t len);

/**
 * Batch value and gradient at `x`. `indices` are 0-based and may repeat;
 * `grad` receives `dim` values.
 *
 * # Safety
 * `problem` is a live handle; the arrays hold the stated lengths; `f` is
 * writable; `grad` has room for `x_len` values.
 */
enum SlsError sls_evaluate_batch(const struct SlsProblem *problem,
                                 const size_t *indices,
                                 size_t num_indices,
                                 const double *x,
                                 size_t x_len,
                                 double *f,
                                 double *grad);

/**
 * Exact `f(x)` and `∇f(x)`.
 *
 * # Safety
 * As [`sls_evaluate_batch`].
 */
enum SlsError sls_full_oracle(const struct SlsProblem *problem,
                              const double *x,
                              size_t x_len,
                              double *f,
                              double *grad);

/**
 * # Safety
 * `out` is writable.
 */
enum SlsError sls_run_config_default(struct SlsRunConfig *out);

/**
 * Runs the optimizer. `x0` overrides the configured start when non-null.
 * A line-search stall is not an error: it yields a run whose status is
 * `Stalled`.
 *
 * # Safety
 * `problem` is a live handle; `config` is readable; `x0` is null or holds
 * `x0_len` values; `out` is writable.
 */
enum SlsError sls_run(const struct SlsProblem *problem,
                      const struct SlsRunConfig *config,
                      const double *x0,
                      size_t x0_len,
                      struct SlsRun **out);

/**
 * # Safety
 * `run` is null or a live handle from [`sls_run`].
 */
void sls_run_free(struct SlsRun *run);

/**
 * # Safety
 * `run` is a live handle; `out` is writable.
 */
enum SlsError sls_run_summary(const struct SlsRun *run, struct SlsRunSummary *out);

/**
 * # Safety
 * `run` is a live handle; `out` is writable.
 */
enum SlsError sls_run_record(const struct SlsRun *run, size_t index, struct SlsRecord *out);

/**
 * Copies the final iterate; `len` must equal the dimension.
 *
 * # Safety
 * `run` is a live handle; `out` has room for `len` values.
 */
enum SlsError sls_run_final_x(const struct SlsRun *run, double *out, size_t len);

/**
 * Geometric rate fitted to the logged gaps `f − f_star`.
 *
 * # Safety
 * `run` is a live handle; `rate` and `r_squared` are writable.
 */
enum SlsError sls_run_contraction(const struct SlsRun *run,
                                  double f_star,
                                  double *rate,
                                  double *r_squared);

/**
 * Largest step the Armijo test is guaranteed to accept for an
 * `l`-smooth batch: `2 c2 (1 − γ) / (c1² l)`.
 *
 * # Safety
 * `out` is writable.
 */
enum SlsError sls_alpha_low(double c1, double c2, double gamma, double l, double *out);

/**
 * Worst-case number of backtracks from `alpha_max` down to `alpha_low`.
 *
 * # Safety
 * `out` is writable.
 */
enum SlsError sls_jstar(double alpha_max, double alpha_low, double delta, uint32_t *out);

/**
 * # Safety
 * `constants` is readable; `out` is writable.
 */
enum SlsError sls_compute_eta(const struct SlsTheoremConstants *constants,
                              struct SlsEtaReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLSGD_FFI_H */
