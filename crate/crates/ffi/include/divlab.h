#ifndef DIVLAB_H
#define DIVLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DivlabDescentKind {
  DIVLAB_DESCENT_KIND_FIXED_POINT = 0,
  DIVLAB_DESCENT_KIND_APPROX_FIXED_POINT = 1,
  DIVLAB_DESCENT_KIND_STUCK_MINIMAL_SET = 2,
} DivlabDescentKind;

typedef enum DivlabStatus {
  DIVLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DIVLAB_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not UTF-8.
   */
  DIVLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Text input did not parse; the message carries line and column.
   */
  DIVLAB_STATUS_PARSE = 3,
  /**
   * Input parsed but violates a precondition.
   */
  DIVLAB_STATUS_INVALID_INPUT = 4,
  /**
   * The ground set is larger than the operation supports.
   */
  DIVLAB_STATUS_CAP_EXCEEDED = 5,
  /**
   * Internal error; the library state is still usable.
   */
  DIVLAB_STATUS_PANIC = 6,
} DivlabStatus;

typedef enum DivlabVerdict {
  DIVLAB_VERDICT_HYPERCONVEX = 0,
  DIVLAB_VERDICT_HYPERCONVEX_WITHIN_TOLERANCE = 1,
  DIVLAB_VERDICT_NOT_HYPERCONVEX = 2,
} DivlabVerdict;

/**
 * A validated finite diversity.
 */
typedef struct DivlabDiversity DivlabDiversity;

/**
 * A self-map of a diversity's ground set.
 */
typedef struct DivlabMap DivlabMap;

/**
 * `point` is meaningful for the two fixed-point kinds, `set` (a bitmask
 * in ground order) for the stuck kind.
 */
typedef struct DivlabDescentResult {
  enum DivlabDescentKind kind;
  size_t point;
  uint64_t set;
  size_t steps;
} DivlabDescentResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *divlab_version(void);

/**
 * The message of the last failed call on this thread, or null. Valid
 * until the next failing call on this thread; do not free.
 */
const char *divlab_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void divlab_string_free(char *s);

/**
 * Parses a diversity file and validates the result.
 *
 * # Safety
 * `text_in` must be a NUL-terminated string; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_parse(const char *text_in, struct DivlabDiversity **out);

/**
 * `δ(A) = |A| − 1` with the default labels `x, y, z`, or `p1 … pn` above three points.
 *
 * # Safety
 * `out` must be writable.
 */
enum DivlabStatus divlab_diversity_counting(size_t n, struct DivlabDiversity **out);

/**
 * Releases a diversity. Null is ignored.
 *
 * # Safety
 * `div` must come from this library and not have been freed.
 */
void divlab_diversity_free(struct DivlabDiversity *div);

/**
 * Number of points.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_len(const struct DivlabDiversity *div, size_t *out);

/**
 * Label of point `index`, as an owned string.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_label(const struct DivlabDiversity *div,
                                         size_t index,
                                         char **out);

/**
 * `δ(A)` for the bitmask `mask` (bit `i` is point `i`), as `p/q`.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_value(const struct DivlabDiversity *div,
                                         uint64_t mask,
                                         char **out);

/**
 * The diversity as an explicit-table file.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_to_text(const struct DivlabDiversity *div, char **out);

/**
 * Checks both axioms on a diversity file without rejecting it. Sets
 * `out` to whether the table is a diversity.
 *
 * # Safety
 * `text_in` must be a NUL-terminated string; `out` must be writable.
 */
enum DivlabStatus divlab_verify_text(const char *text_in, bool *out);

/**
 * Whether `(|A| − 1)·δ(A)` is at most the sum of pairwise distances for
 * every `A`.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_hypcon(const struct DivlabDiversity *div, bool *out);

/**
 * Hyperconvexity of the diversity itself.
 *
 * # Safety
 * `div` must be a live handle; `out` must be writable.
 */
enum DivlabStatus divlab_diversity_hyperconvex(const struct DivlabDiversity *div,
                                               enum DivlabVerdict *out);

/**
 * Hyperconvexity of the induced metric up to `tolerance` (`p/q`; null
 * means zero).
 *
 * # Safety
 * `div` must be a live handle; `tolerance` null or NUL-terminated; `out`
 * must be writable.
 */
enum DivlabStatus divlab_metric_hyperconvex(const struct DivlabDiversity *div,
                                            const char *tolerance,
                                            enum DivlabVerdict *out);

/**
 * Parses a map file over the ground set of `div`.
 *
 * # Safety
 * `div` must be a live handle; `text_in` NUL-terminated; `out` writable.
 */
enum DivlabStatus divlab_map_parse(const struct DivlabDiversity *div,
                                   const char *text_in,
                                   struct DivlabMap **out);

/**
 * Releases a map. Null is ignored.
 *
 * # Safety
 * `map` must come from this library and not have been freed.
 */
void divlab_map_free(struct DivlabMap *map);

/**
 * Nonexpansiveness of `map` for the induced metric and for `δ`.
 *
 * # Safety
 * Handles must be live; both out-parameters writable.
 */
enum DivlabStatus divlab_map_nonexpansive(const struct DivlabDiversity *div,
                                          const struct DivlabMap *map,
                                          bool *out_metric,
                                          bool *out_diversity);

/**
 * Runs the minimal-invariant-set descent from the bitmask `start`
 * (zero means the whole ground set) with terminal tolerance `epsilon`
 * (`p/q`; null means zero).
 *
 * # Safety
 * Handles must be live; `epsilon` null or NUL-terminated; `out` writable.
 */
enum DivlabStatus divlab_descent(const struct DivlabDiversity *div,
                                 const struct DivlabMap *map,
                                 uint64_t start,
                                 const char *epsilon,
                                 struct DivlabDescentResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIVLAB_H */
