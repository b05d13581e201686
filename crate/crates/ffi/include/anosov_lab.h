#ifndef ANOSOV_LAB_H
#define ANOSOV_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlStatus {
  AL_STATUS_OK = 0,
  AL_STATUS_NULL_POINTER = 1,
  AL_STATUS_INVALID_INPUT = 2,
  AL_STATUS_UNDECIDED = 3,
  AL_STATUS_NOT_HYPERBOLIC = 4,
  AL_STATUS_BUDGET_EXCEEDED = 5,
  AL_STATUS_NO_CONVERGENCE = 6,
  AL_STATUS_OVERFLOW = 7,
  AL_STATUS_FAILED = 8,
  AL_STATUS_PANIC = 9,
} AlStatus;

typedef struct AlConjugacy AlConjugacy;

typedef struct AlMatrix AlMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next failing call on the same thread.
 */
const char *al_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void al_string_free(char *s);

/**
 * dim × dim matrix from row-major entries.
 *
 * # Safety
 * `entries` must point to dim² readable values; `out` must be writable.
 */
enum AlStatus al_matrix_new(const int64_t *entries, size_t dim, struct AlMatrix **out);

/**
 * Built-in name (cat, B3, C6, D4), inline JSON rows, or a path to a JSON file.
 *
 * # Safety
 * `src` must be a NUL-terminated string; `out` must be writable.
 */
enum AlStatus al_matrix_parse(const char *src, struct AlMatrix **out);

/**
 * # Safety
 * `m` must come from `al_matrix_new`/`al_matrix_parse` and not have been freed.
 */
void al_matrix_free(struct AlMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle or NULL (returns 0).
 */
size_t al_matrix_dim(const struct AlMatrix *m);

/**
 * Classify against the theorem's hypotheses. `report_json` may be NULL;
 * otherwise it receives a JSON report to release with `al_string_free`.
 *
 * # Safety
 * `m` must be a live handle; `satisfies` must be writable.
 */
enum AlStatus al_classify(const struct AlMatrix *m, bool *satisfies, char **report_json);

/**
 * Number of points fixed by Lⁿ.
 *
 * # Safety
 * `m` must be a live handle; `count` must be writable.
 */
enum AlStatus al_count_fixed(const struct AlMatrix *m, uint32_t n, uint64_t *count);

/**
 * Solve h∘L = f∘h for f = L + εp, p a named sample perturbation
 * (sample1, sample4). `grid` = 0 picks the solve grid automatically.
 *
 * # Safety
 * `m` must be a live handle, `pert` a NUL-terminated string, `out` writable.
 */
enum AlStatus al_conjugacy_solve(const struct AlMatrix *m,
                                 const char *pert,
                                 double epsilon,
                                 double tol,
                                 size_t grid,
                                 struct AlConjugacy **out);

/**
 * # Safety
 * `h` must come from `al_conjugacy_solve` and not have been freed.
 */
void al_conjugacy_free(struct AlConjugacy *h);

/**
 * Verified residual sup|h∘L − f∘h|; NaN for a NULL handle.
 *
 * # Safety
 * `h` must be a live handle or NULL.
 */
double al_conjugacy_residual(const struct AlConjugacy *h);

/**
 * h(x) for x ∈ R^dim (lifted; the result is x + u(x)).
 *
 * # Safety
 * `x` and `out` must each hold `dim` values.
 */
enum AlStatus al_conjugacy_eval(const struct AlConjugacy *h,
                                const double *x,
                                size_t dim,
                                double *out);

/**
 * JSON summary of the field, released with `al_string_free`.
 *
 * # Safety
 * `h` must be a live handle; `out` writable.
 */
enum AlStatus al_conjugacy_report(const struct AlConjugacy *h, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANOSOV_LAB_H */
