#ifndef GABIC_H
#define GABIC_H

/* Generated from the Rust sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GabicStatus {
  GABIC_STATUS_OK = 0,
  GABIC_STATUS_NULL_POINTER = 1,
  GABIC_STATUS_INVALID_PARAMETER = 2,
  /**
   * Step size too coarse for the requested accuracy.
   */
  GABIC_STATUS_STEP_SIZE = 3,
  GABIC_STATUS_DEGENERATE = 4,
  GABIC_STATUS_PRECONDITION = 5,
  GABIC_STATUS_BUFFER_TOO_SMALL = 6,
  GABIC_STATUS_PANIC = 7,
} GabicStatus;

/**
 * Opaque model parameters.
 */
typedef struct GabicParams GabicParams;

/**
 * Opaque integrated trajectory.
 */
typedef struct GabicTrajectory GabicTrajectory;

/**
 * One bound state in the continuum.
 */
typedef struct GabicBic {
  /**
   * `+1` for the upper dressed branch, `-1` for the lower.
   */
  int32_t branch;
  int64_t q;
  /**
   * Rotating-frame frequency.
   */
  double omega;
  double residue_re;
  double residue_im;
  double phase_residual;
} GabicBic;

/**
 * Resonant parameters hosting two bound states.
 */
typedef struct GabicDesign {
  double omega_e;
  double g_n;
  int64_t q_plus;
  int64_t q_minus;
  double tau;
} GabicDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gabic_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t gabic_last_error(char *buf, size_t len);

/**
 * Builds parameters from rates: `Γ`, `γ`, with the coupling phases chosen
 * so that `γ` has the requested sign.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum GabicStatus gabic_params_new(double omega_e,
                                  double omega_s,
                                  double omega_c,
                                  double g,
                                  double gamma_total,
                                  double gamma_coll,
                                  double v,
                                  double d,
                                  struct GabicParams **out_params);

/**
 * # Safety
 * `params` must be null or come from [`gabic_params_new`], and not be used
 * afterwards.
 */
void gabic_params_free(struct GabicParams *params);

/**
 * Integrates the delay equation in subspace `n` from the given rotating-
 * frame initial amplitudes up to `t_max`.
 *
 * # Safety
 * `params` must be a live handle and `out_traj` valid for a pointer write.
 */
enum GabicStatus gabic_integrate(const struct GabicParams *params,
                                 uint32_t n,
                                 double u_e0_re,
                                 double u_e0_im,
                                 double u_s0_re,
                                 double u_s0_im,
                                 double t_max,
                                 size_t steps_per_delay,
                                 struct GabicTrajectory **out_traj);

/**
 * # Safety
 * `traj` must be null or come from [`gabic_integrate`], and not be used
 * afterwards.
 */
void gabic_trajectory_free(struct GabicTrajectory *traj);

/**
 * Number of samples; sample `k` is at `t = k·dt`. Zero for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t gabic_trajectory_len(const struct GabicTrajectory *traj);

/**
 * Sample spacing. NaN for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
double gabic_trajectory_dt(const struct GabicTrajectory *traj);

/**
 * Writes `|U_e(t_k)|²` for every sample into `buf`.
 *
 * # Safety
 * `traj` must be a live handle and `buf` valid for `len` doubles.
 */
enum GabicStatus gabic_trajectory_population(const struct GabicTrajectory *traj,
                                             double *buf,
                                             size_t len);

/**
 * Writes the rotating-frame `U_e(t_k)` as separate real and imaginary
 * arrays.
 *
 * # Safety
 * `traj` must be a live handle; `re` and `im` valid for `len` doubles.
 */
enum GabicStatus gabic_trajectory_amplitude(const struct GabicTrajectory *traj,
                                            double *re,
                                            double *im,
                                            size_t len);

/**
 * Finds the bound states of subspace `n` for an initially excited atom.
 * `*count` receives the number found; if it exceeds `capacity`, nothing is
 * written to `out` and `BufferTooSmall` is returned.
 *
 * # Safety
 * `params` must be a live handle, `out` valid for `capacity` entries (may
 * be null when `capacity` is 0) and `count` valid for a write.
 */
enum GabicStatus gabic_find_bics(const struct GabicParams *params,
                                 uint32_t n,
                                 double tol,
                                 struct GabicBic *out_bics,
                                 size_t capacity,
                                 size_t *count);

/**
 * Designs a resonant double bound state near `omega_e_target`.
 *
 * # Safety
 * `out_design` must be valid for a write.
 */
enum GabicStatus gabic_design_double_bic(double omega_e_target,
                                         double tau,
                                         int64_t q_plus,
                                         int64_t q_minus,
                                         struct GabicDesign *out_design);

/**
 * Period of the two-bound-state beat in subspace `n`.
 *
 * # Safety
 * `params` must be a live handle and `out_period` valid for a write.
 */
enum GabicStatus gabic_beat_period(const struct GabicParams *params,
                                   uint32_t n,
                                   double *out_period);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GABIC_H */
