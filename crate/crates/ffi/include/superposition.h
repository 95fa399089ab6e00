#ifndef SUPERPOSITION_H
#define SUPERPOSITION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_INPUT = 2,
  SP_STATUS_LINEARLY_DEPENDENT = 3,
  SP_STATUS_NO_CONVERGENCE = 4,
  SP_STATUS_UNKNOWN_MEASURE = 5,
  SP_STATUS_PANIC = 6,
} SpStatus;

/**
 * Opaque basis handle.
 */
typedef struct SpBasis SpBasis;

/**
 * Opaque density-matrix handle.
 */
typedef struct SpState SpState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Constant-overlap basis `⟨c_i|c_j⟩ = mu` of dimension `d`.
 */
enum SpStatus sp_basis_constant_overlap(uintptr_t d, double mu, struct SpBasis **out);

/**
 * Basis from the columns of a `d × d` matrix.
 *
 * # Safety
 * See the module notes on matrix arrays.
 */
enum SpStatus sp_basis_from_columns(uintptr_t d,
                                    const double *re,
                                    const double *im,
                                    struct SpBasis **out);

/**
 * # Safety
 * `basis` must come from this library and not be freed twice.
 */
void sp_basis_free(struct SpBasis *basis);

/**
 * # Safety
 * `basis` must be a live handle or null.
 */
enum SpStatus sp_basis_gram_determinant(const struct SpBasis *basis, double *out);

/**
 * Density matrix from a `d × d` matrix (validated: Hermitian, unit trace, PSD).
 *
 * # Safety
 * See the module notes on matrix arrays.
 */
enum SpStatus sp_state_from_matrix(uintptr_t d,
                                   const double *re,
                                   const double *im,
                                   struct SpState **out);

/**
 * `ρ(x)` and its qubit basis with overlap `mu`.
 */
enum SpStatus sp_state_rho_x(double x,
                             double mu,
                             struct SpState **out_state,
                             struct SpBasis **out_basis);

/**
 * # Safety
 * `state` must come from this library and not be freed twice.
 */
void sp_state_free(struct SpState *state);

/**
 * Value of the named measure (`l1`, `rel_ent`, `robustness`, `weight`,
 * `delta`, `l1_roof`, `rel_ent_roof`, `rank`).
 *
 * # Safety
 * Handles must be live; `name` must be a NUL-terminated string.
 */
enum SpStatus sp_measure(const struct SpState *state,
                         const struct SpBasis *basis,
                         const char *name,
                         uint64_t seed,
                         double *out);

/**
 * Full result `{value, certificate, converged, iterations}` as JSON. The
 * string is released with [`sp_string_free`].
 *
 * # Safety
 * Handles must be live; `name` must be a NUL-terminated string.
 */
enum SpStatus sp_measure_json(const struct SpState *state,
                              const struct SpBasis *basis,
                              const char *name,
                              uint64_t seed,
                              char **out);

/**
 * # Safety
 * `s` must come from [`sp_measure_json`] and not be freed twice.
 */
void sp_string_free(char *s);

/**
 * Message of the last failed call on this thread (empty after a success).
 * Valid until the next call into the library on the same thread.
 */
const char *sp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERPOSITION_H */
