#ifndef FRONTLAB_H
#define FRONTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  FL_STATUS_INVALID_ARGUMENT = 2,
  FL_STATUS_INVALID_UTF8 = 3,
  FL_STATUS_WINDOW_TOO_SMALL = 4,
  FL_STATUS_NO_FRONT = 5,
  FL_STATUS_ORDER_VIOLATION = 6,
  FL_STATUS_INSUFFICIENT_SAMPLES = 7,
  FL_STATUS_IO = 8,
  FL_STATUS_BUFFER_TOO_SMALL = 9,
  FL_STATUS_PANIC = 10,
  FL_STATUS_INTERNAL = 11,
} FlStatus;

/**
 * Process simulated by an [`FlSimulation`].
 */
typedef enum FlModel {
  FL_MODEL_FA1F = 0,
  FL_MODEL_TCP = 1,
} FlModel;

/**
 * Initial condition of an [`FlSimulation`].
 */
typedef enum FlInit {
  /**
   * A single zero at the origin.
   */
  FL_INIT_DELTA0 = 0,
  /**
   * Ones on the left, a zero at the origin, Bernoulli spins on the right.
   */
  FL_INIT_BERNOULLI = 1,
} FlInit;

/**
 * Opaque simulation handle.
 */
typedef struct FlSimulation FlSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on this thread.
 */
const char *fl_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *fl_version(void);

/**
 * Releases a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fl_string_free(char *s);

/**
 * `2λ_c / (1 + 2λ_c)`.
 */
double fl_q_bar(void);

/**
 * Creates a simulation of trajectory `run` on the window `[lo, hi]`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum FlStatus fl_simulation_new(enum FlModel model,
                                enum FlInit init,
                                double q,
                                uint64_t seed,
                                uint64_t run,
                                int64_t lo,
                                int64_t hi,
                                struct FlSimulation **out);

/**
 * Releases a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`fl_simulation_new`] and not have been freed.
 */
void fl_simulation_free(struct FlSimulation *sim);

/**
 * Advances to time `t`. `extinct` (optional) is set to 1 when a contact
 * process died before `t`, which also stops the run.
 *
 * # Safety
 * `sim` must be a live handle; `extinct` may be null.
 */
enum FlStatus fl_simulation_run_until(struct FlSimulation *sim, double t, int32_t *extinct);

/**
 * Current time.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum FlStatus fl_simulation_time(const struct FlSimulation *sim, double *out);

/**
 * Position of the leftmost zero; [`FlStatus::NoFront`] if there is none.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum FlStatus fl_simulation_front(const struct FlSimulation *sim, int64_t *out);

/**
 * Spin at `site` (the far field outside the window).
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum FlStatus fl_simulation_spin(const struct FlSimulation *sim, int64_t site, uint8_t *out);

/**
 * Number of clock rings processed so far.
 *
 * # Safety
 * `sim` must be a live handle and `out` writable.
 */
enum FlStatus fl_simulation_rings(const struct FlSimulation *sim, uint64_t *out);

/**
 * Checks a JSON experiment config. `findings_json` receives a JSON array
 * to release with [`fl_string_free`]; `has_errors` (optional) is set to 1
 * when a finding is an error.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `findings_json`
 * writable; `has_errors` may be null.
 */
enum FlStatus fl_validate_json(const char *config_json, char **findings_json, int32_t *has_errors);

/**
 * Runs an experiment from a JSON config. When `out_dir` is not null the
 * result files are written there. `summary_json` (optional) receives the
 * summary, to release with [`fl_string_free`].
 *
 * # Safety
 * String arguments must be NUL-terminated; `summary_json` may be null.
 */
enum FlStatus fl_experiment_run_json(const char *config_json,
                                     const char *out_dir,
                                     char **summary_json);

/**
 * Largest detailed-balance violation of the zero-boundary FA-1f generator
 * on `sites` sites.
 *
 * # Safety
 * `out` must be writable.
 */
enum FlStatus fl_oracle_detailed_balance(size_t sites, double q, double *out);

/**
 * Exact law at time `t` of the zero-boundary FA-1f on `sites` sites from
 * state `initial` (bit `k` is the spin at site `k`). Writes `2^sites`
 * probabilities to `probs`, which must hold `len` values.
 *
 * # Safety
 * `probs` must point to `len` writable doubles.
 */
enum FlStatus fl_oracle_transient(size_t sites,
                                  double q,
                                  double t,
                                  size_t initial,
                                  double *probs,
                                  size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRONTLAB_H */
