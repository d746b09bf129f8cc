#ifndef PLAYERANK_H
#define PLAYERANK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PrStatus {
  PR_STATUS_OK = 0,
  PR_STATUS_NULL_POINTER = 1,
  PR_STATUS_INVALID_ARGUMENT = 2,
  PR_STATUS_NOT_FOUND = 3,
  PR_STATUS_PARSE_ERROR = 4,
  PR_STATUS_IO_ERROR = 5,
  PR_STATUS_MODEL_ERROR = 6,
  PR_STATUS_INTERNAL = 7,
} PrStatus;

/**
 * Opaque engine handle.
 */
typedef struct PrEngine PrEngine;

/**
 * One search result.
 */
typedef struct PrSearchHit {
  uint64_t player_id;
  double z;
  double s;
  double r_bar;
} PrSearchHit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *pr_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pr_version(void);

/**
 * Builds an engine from a synthetic corpus of `matches` matches.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PrStatus pr_engine_demo(uint32_t matches, uint64_t seed, struct PrEngine **out);

/**
 * Opens a store file and a model bundle. `config_path` may be null.
 *
 * # Safety
 * Paths must be NUL-terminated strings or null; `out` must be writable.
 */
enum PrStatus pr_engine_open(const char *store_path,
                             const char *model_path,
                             const char *config_path,
                             struct PrEngine **out);

/**
 * Releases an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from `pr_engine_open`/`pr_engine_demo` and not be used afterwards.
 */
void pr_engine_free(struct PrEngine *engine);

/**
 * Number of roles and the search grid of an engine.
 *
 * # Safety
 * `engine` must be a live handle; output pointers must be writable.
 */
enum PrStatus pr_engine_info(const struct PrEngine *engine,
                             uint32_t *roles,
                             uint32_t *grid_rows,
                             uint32_t *grid_cols);

/**
 * Current rating r̄ of a player and the number of matches behind it.
 *
 * # Safety
 * `engine` must be a live handle; output pointers must be writable.
 */
enum PrStatus pr_engine_player_rating(const struct PrEngine *engine,
                                      uint64_t player_id,
                                      double *r_bar,
                                      uint32_t *matches);

/**
 * Searches the players most present in the given zones, best first. Writes
 * at most `capacity` hits and stores the count in `written`.
 *
 * # Safety
 * `zones` must point to `n_zones` values; `hits` to `capacity` writable slots.
 */
enum PrStatus pr_engine_search(const struct PrEngine *engine,
                               const uint32_t *zones,
                               size_t n_zones,
                               struct PrSearchHit *hits,
                               size_t capacity,
                               size_t *written);

/**
 * Rating of one normalized performance vector under `weights`.
 *
 * # Safety
 * `values` and `weights` must each point to `n` doubles; `out` must be writable.
 */
enum PrStatus pr_rate_values(const double *values, const double *weights, size_t n, double *out);

/**
 * Versatility of a player whose matches were each played in one role.
 *
 * # Safety
 * `roles` must point to `n` values; `out` must be writable.
 */
enum PrStatus pr_versatility(const uint32_t *roles, size_t n, uint32_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLAYERANK_H */
