#ifndef PPFXT_H
#define PPFXT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PpfxtBaseline {
  PPFXT_BASELINE_FULL = 0,
  PPFXT_BASELINE_CLASSICAL_UBF = 1,
  PPFXT_BASELINE_NO_PF = 2,
  PPFXT_BASELINE_CFB = 3,
} PpfxtBaseline;

/**
 * Result code of every fallible call.
 */
typedef enum PpfxtStatus {
  PPFXT_STATUS_OK = 0,
  PPFXT_STATUS_NULL_POINTER = 1,
  PPFXT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed or inconsistent scenario JSON.
   */
  PPFXT_STATUS_CONFIG = 3,
  /**
   * The tracking error left the envelope; a partial trajectory is still returned.
   */
  PPFXT_STATUS_ENVELOPE_VIOLATION = 4,
  /**
   * Non-finite state, failed quadrature, oracle horizon exceeded, ...
   */
  PPFXT_STATUS_NUMERIC = 5,
  /**
   * A structural precondition of a bound does not hold (the value is not defined).
   */
  PPFXT_STATUS_PRECONDITION = 6,
  PPFXT_STATUS_IO = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  PPFXT_STATUS_PANIC = 8,
} PpfxtStatus;

/**
 * Opaque scenario handle.
 */
typedef struct PpfxtScenario PpfxtScenario;

/**
 * Opaque trajectory handle; keeps the scenario it was produced from.
 */
typedef struct PpfxtTrajectory PpfxtTrajectory;

/**
 * Trajectory summary. `convergence_time` is NaN when the error never settles.
 */
typedef struct PpfxtMetrics {
  size_t envelope_violations;
  size_t prescribed_violations;
  double max_abs_error_after_ts;
  double overshoot;
  double convergence_time;
  double control_energy;
  double peak_input;
  double final_e1;
} PpfxtMetrics;

/**
 * `V̇ ≤ -μ1 V^p - μ2 V^q + μ3` with `p = p_num/p_den`, `q = q_num/q_den`.
 */
typedef struct PpfxtBoundProblem {
  double mu1;
  double mu2;
  double mu3;
  uint32_t p_num;
  uint32_t p_den;
  uint32_t q_num;
  uint32_t q_den;
  double tau;
} PpfxtBoundProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ppfxt_version(void);

/**
 * Copy the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full length including the NUL, or 0 if
 * there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t ppfxt_last_error(char *buf, size_t cap);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ppfxt_string_free(char *s);

/**
 * The built-in attitude-tracking scenario (10 s, `dt = 1e-4`).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum PpfxtStatus ppfxt_scenario_default(struct PpfxtScenario **out);

/**
 * The exponent-study scenario with barrier exponent `m = n = num/den` (odd/odd).
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum PpfxtStatus ppfxt_scenario_exponent_study(uint32_t num,
                                               uint32_t den,
                                               struct PpfxtScenario **out);

/**
 * Parse and validate a scenario from JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for a pointer write.
 */
enum PpfxtStatus ppfxt_scenario_from_json(const char *json, struct PpfxtScenario **out);

/**
 * Serialize the effective scenario; free the result with [`ppfxt_string_free`].
 *
 * # Safety
 * `sc` must be a live handle; `out` must be valid for a pointer write.
 */
enum PpfxtStatus ppfxt_scenario_to_json(const struct PpfxtScenario *sc, char **out);

/**
 * Set the integration step; the scenario is left unchanged if the result is invalid.
 *
 * # Safety
 * `sc` must be a live handle.
 */
enum PpfxtStatus ppfxt_scenario_set_dt(struct PpfxtScenario *sc, double dt);

/**
 * # Safety
 * `sc` must be a live handle.
 */
enum PpfxtStatus ppfxt_scenario_set_t_end(struct PpfxtScenario *sc, double t_end);

/**
 * Keep every `n`-th step in the trajectory (`n ≥ 1`).
 *
 * # Safety
 * `sc` must be a live handle.
 */
enum PpfxtStatus ppfxt_scenario_set_record_every(struct PpfxtScenario *sc, size_t n);

/**
 * `baseline` is one of the `PPFXT_BASELINE_*` values.
 *
 * # Safety
 * `sc` must be a live handle.
 */
enum PpfxtStatus ppfxt_scenario_set_baseline(struct PpfxtScenario *sc, uint32_t baseline);

/**
 * # Safety
 * `sc` must be null or a live handle; it is invalid afterwards.
 */
void ppfxt_scenario_free(struct PpfxtScenario *sc);

/**
 * Run the closed loop. On an envelope violation or numeric failure the
 * status says so and `*out` still receives the trajectory recorded up to
 * the failure.
 *
 * # Safety
 * `sc` must be a live handle; `out` must be valid for a pointer write.
 */
enum PpfxtStatus ppfxt_simulate(const struct PpfxtScenario *sc, struct PpfxtTrajectory **out);

/**
 * Number of samples.
 *
 * # Safety
 * `tr` must be null or a live handle.
 */
size_t ppfxt_trajectory_len(const struct PpfxtTrajectory *tr);

/**
 * Copy series `name` (a CSV column name such as `"t"` or `"e1"`) into `buf`.
 * Copies `min(cap, len)` values and always stores the full length in `*len`.
 *
 * # Safety
 * `tr` must be a live handle, `name` NUL-terminated, `buf` null or valid for
 * `cap` doubles, `len` valid for a write.
 */
enum PpfxtStatus ppfxt_trajectory_series(const struct PpfxtTrajectory *tr,
                                         const char *name,
                                         double *buf,
                                         size_t cap,
                                         size_t *len);

/**
 * # Safety
 * `tr` must be a live handle; `out` valid for a write.
 */
enum PpfxtStatus ppfxt_trajectory_metrics(const struct PpfxtTrajectory *tr,
                                          struct PpfxtMetrics *out);

/**
 * # Safety
 * `tr` must be a live handle; `path` NUL-terminated.
 */
enum PpfxtStatus ppfxt_trajectory_write_csv(const struct PpfxtTrajectory *tr, const char *path);

/**
 * # Safety
 * `tr` must be null or a live handle; it is invalid afterwards.
 */
void ppfxt_trajectory_free(struct PpfxtTrajectory *tr);

/**
 * Radius of the residual set (0 when `mu3 = 0`).
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_residual(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Gamma-function settling bound.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_t1(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Same bound via the reflection identity.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_t1_reflected(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Classical bound `1/(τμ1(1-p)) + 1/(τμ2(q-1))`.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_t2(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Arctangent bound; `Precondition` unless `p + q = 2`.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_lemma2(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Partial-fraction bound; the integer `a` with `(a-1)p + q = a` is detected.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_lemma3(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Rational-exponent bound.
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_bound_lemma4(const struct PpfxtBoundProblem *bp, double *out);

/**
 * Time for the comparison ODE started at `v0` to reach the residual set
 * (or `1e-12` when `mu3 = 0`).
 *
 * # Safety
 * `bp` and `out` must be valid pointers.
 */
enum PpfxtStatus ppfxt_settle_oracle(const struct PpfxtBoundProblem *bp, double v0, double *out);

/**
 * Γ(z) for `z > 0`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PpfxtStatus ppfxt_gamma(double z, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPFXT_H */
