#ifndef MPIDEALS_H
#define MPIDEALS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every entry point.
 */
typedef enum MpStatus {
  MP_STATUS_OK = 0,
  /**
   * Well-formed input whose mathematical hypotheses fail.
   */
  MP_STATUS_MATH_FAILURE = 1,
  /**
   * Malformed JSON, unknown names, or shapes that do not fit the algebra.
   */
  MP_STATUS_INVALID_INPUT = 2,
  MP_STATUS_NULL_POINTER = 3,
  /**
   * A Rust panic was caught at the boundary.
   */
  MP_STATUS_PANIC = 4,
} MpStatus;

/**
 * Block algebra with its tolerances.
 */
typedef struct MpAlgebra MpAlgebra;

/**
 * Element of a block algebra.
 */
typedef struct MpElement MpElement;

/**
 * Moore-Penrose verdicts, one per equivalent characterisation.
 */
typedef struct MpVerdicts {
  bool generalized_inverse;
  bool penrose;
  bool isolated_zero;
  bool functional_projection;
  bool mp_projection;
} MpVerdicts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *mp_last_error(void);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mp_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mp_version(void);

/**
 * Algebra over the default block profile with default tolerances.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MpStatus mp_algebra_new_default(struct MpAlgebra **out);

/**
 * Algebra with blocks `0..len` of sizes `sizes[0..len]`.
 *
 * # Safety
 * `sizes` must point to `len` readable values; `out` must be valid.
 */
enum MpStatus mp_algebra_from_sizes(const uintptr_t *sizes, uintptr_t len, struct MpAlgebra **out);

/**
 * Override a tolerance by name (for example `"rank_tol"`).
 *
 * # Safety
 * `alg` must be a live handle and `name` a NUL-terminated string.
 */
enum MpStatus mp_algebra_set_tolerance(struct MpAlgebra *alg, const char *name, double value);

/**
 * # Safety
 * `alg` must be NULL or a handle not yet freed.
 */
void mp_algebra_free(struct MpAlgebra *alg);

/**
 * Parse `{"gamma": [re, im], "blocks": {"t": {"rows", "cols", "data"}}}`
 * and check it against the algebra's block sizes.
 *
 * # Safety
 * `alg` must be live, `json` NUL-terminated, `out` valid.
 */
enum MpStatus mp_element_from_json(const struct MpAlgebra *alg,
                                   const char *json,
                                   struct MpElement **out);

/**
 * # Safety
 * `el` must be live and `out` valid; free the result with [`mp_string_free`].
 */
enum MpStatus mp_element_to_json(const struct MpElement *el, char **out);

/**
 * # Safety
 * `el` must be NULL or a handle not yet freed.
 */
void mp_element_free(struct MpElement *el);

/**
 * C*-norm `max(|gamma|, sup_t ||W_t(a)||)`.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum MpStatus mp_element_norm(const struct MpAlgebra *alg, const struct MpElement *el, double *out);

/**
 * Moore-Penrose inverse with its verdicts and the smallest nonzero point of
 * the spectrum of `a*a` (`+inf` for `a = 0`). `verdicts` and `gap` may be
 * NULL.
 *
 * # Safety
 * Handles must be live; `out` valid; optional outputs NULL or valid.
 */
enum MpStatus mp_pseudoinverse(const struct MpAlgebra *alg,
                               const struct MpElement *el,
                               struct MpElement **out,
                               struct MpVerdicts *verdicts,
                               double *gap);

/**
 * Run one query operation (as `mpideals query`) on an instance document
 * over the default block profile. The JSON report is written to `out`
 * whenever the operation ran, including when a certificate failed
 * (status `MathFailure`).
 *
 * # Safety
 * `op` and `instance_json` NUL-terminated; `out` valid.
 */
enum MpStatus mp_query(const char *op, const char *instance_json, char **out);

/**
 * Run a verification suite; `trials = 0` keeps each check's default count.
 * The report (without timestamp) is written to `out`; the status is
 * `MathFailure` when some check failed.
 *
 * # Safety
 * `name` NUL-terminated; `out` valid.
 */
enum MpStatus mp_run_suite(const char *name, uint64_t seed, uintptr_t trials, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MPIDEALS_H */
