#ifndef OTTO_FFI_H
#define OTTO_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum OttoStatus {
  OTTO_STATUS_OK = 0,
  OTTO_STATUS_NULL_POINTER = 1,
  OTTO_STATUS_INVALID_PARAMETER = 2,
  OTTO_STATUS_UNPHYSICAL_STATE = 3,
  OTTO_STATUS_SOLVER_FAILURE = 4,
  OTTO_STATUS_INDEX_OUT_OF_RANGE = 5,
  OTTO_STATUS_PANIC = 6,
} OttoStatus;

/**
 * Adiabat propagation mode.
 */
typedef enum OttoAdiabatMode {
  OTTO_ADIABAT_MODE_NUMERIC = 0,
  OTTO_ADIABAT_MODE_SUDDEN = 1,
  OTTO_ADIABAT_MODE_QUASISTATIC = 2,
} OttoAdiabatMode;

/**
 * Opaque engine handle.
 */
typedef struct OttoEngine OttoEngine;

/**
 * Opaque sweep result handle.
 */
typedef struct OttoSweep OttoSweep;

/**
 * Branch durations of one cycle.
 */
typedef struct OttoAllocation {
  double tau_h;
  double tau_hc;
  double tau_c;
  double tau_ch;
} OttoAllocation;

/**
 * Expectations of H, L and D at frequency omega.
 */
typedef struct OttoState {
  double energy;
  double lagrangian;
  double correlation;
  double omega;
} OttoState;

/**
 * Limit-cycle corners A, B, C, D and the per-cycle thermodynamics.
 * `efficiency` is NaN when no heat flows in from the hot bath.
 */
typedef struct OttoCycleResult {
  struct OttoState corners[4];
  double work;
  double heat_hot;
  double heat_cold;
  double efficiency;
  double power;
  double entropy_production;
  double friction_hc;
  double friction_ch;
  double spectral_radius;
} OttoCycleResult;

/**
 * One record of a random sweep; numbers are NaN when `failed` is nonzero.
 */
typedef struct OttoSweepRecord {
  struct OttoAllocation allocation;
  double work;
  double heat_hot;
  double heat_cold;
  double efficiency;
  double power;
  double entropy_production;
  uint8_t sudden_hc;
  uint8_t sudden_ch;
  uint8_t quasistatic_like;
  uint8_t failed;
} OttoSweepRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL,
 * or 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t otto_last_error_message(char *buf, size_t len);

/**
 * Creates an engine with `omega_h > omega_c > 0` and positive bath
 * temperatures and conductances.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum OttoStatus otto_engine_new(double omega_h,
                                double omega_c,
                                double t_hot,
                                double gamma_hot,
                                double t_cold,
                                double gamma_cold,
                                struct OttoEngine **out);

/**
 * Releases an engine; null is ignored.
 *
 * # Safety
 * `engine` must come from [`otto_engine_new`] and not be used afterwards.
 */
void otto_engine_free(struct OttoEngine *engine);

/**
 * Solves the limit cycle for one allocation.
 *
 * # Safety
 * `engine` must be a live handle and `out` valid for writing.
 */
enum OttoStatus otto_limit_cycle(const struct OttoEngine *engine,
                                 struct OttoAllocation alloc,
                                 enum OttoAdiabatMode mode,
                                 struct OttoCycleResult *out);

/**
 * Runs a random allocation sweep with default sampling ranges.
 *
 * # Safety
 * `engine` must be a live handle and `out` valid for writing a pointer.
 */
enum OttoStatus otto_sweep_run(const struct OttoEngine *engine,
                               size_t n,
                               uint64_t seed,
                               enum OttoAdiabatMode mode,
                               struct OttoSweep **out);

/**
 * Number of records in a sweep; 0 for null.
 *
 * # Safety
 * `sweep` must be null or a live handle.
 */
size_t otto_sweep_len(const struct OttoSweep *sweep);

/**
 * Copies record `index` of a sweep.
 *
 * # Safety
 * `sweep` must be a live handle and `out` valid for writing.
 */
enum OttoStatus otto_sweep_get(const struct OttoSweep *sweep,
                               size_t index,
                               struct OttoSweepRecord *out);

/**
 * Releases a sweep; null is ignored.
 *
 * # Safety
 * `sweep` must come from [`otto_sweep_run`] and not be used afterwards.
 */
void otto_sweep_free(struct OttoSweep *sweep);

/**
 * `(omega/2) coth(omega / 2T)`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum OttoStatus otto_equilibrium_energy(double omega, double temperature, double *out);

/**
 * Von Neumann entropy of the Gaussian state with the given expectations.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum OttoStatus otto_von_neumann_entropy(struct OttoState state, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OTTO_FFI_H */
