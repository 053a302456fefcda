#ifndef MATCHDECOMP_H
#define MATCHDECOMP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C interface.
 */
typedef enum MdStatus {
  MD_STATUS_OK = 0,
  MD_STATUS_NULL_POINTER = 1,
  MD_STATUS_INVALID_ARGUMENT = 2,
  MD_STATUS_INVALID_GRAPH = 3,
  MD_STATUS_INVALID_DEMAND = 4,
  MD_STATUS_INVALID_CONFIG = 5,
  MD_STATUS_QUBIT_CAP = 6,
  MD_STATUS_IO = 7,
  MD_STATUS_PARSE = 8,
  MD_STATUS_BUFFER_TOO_SMALL = 9,
  MD_STATUS_INTERNAL = 99,
} MdStatus;

/**
 * Which matchings feed each iteration besides the exact oracle.
 */
typedef enum MdMethod {
  /**
   * No sampling: plain fully-corrective Frank-Wolfe.
   */
  MD_METHOD_EXACT = 0,
  MD_METHOD_RANDOM = 1,
  MD_METHOD_ANNEAL = 2,
  MD_METHOD_QAOA = 3,
} MdMethod;

/**
 * Why a run stopped.
 */
typedef enum MdTermination {
  MD_TERMINATION_CONVERGED = 0,
  MD_TERMINATION_ITERATION_CAP = 1,
  MD_TERMINATION_STALLED = 2,
} MdTermination;

/**
 * Engine settings.
 */
typedef struct MdConfig MdConfig;

/**
 * A validated demand matrix.
 */
typedef struct MdDemand MdDemand;

/**
 * A finished decomposition.
 */
typedef struct MdResult MdResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the last failed call on this thread into `buf`
 * (NUL-terminated, truncated to `capacity`). Returns the full message
 * length in bytes excluding the terminator, or 0 if there is none.
 *
 * # Safety
 * `buf` must be null or point to `capacity` writable bytes.
 */
size_t md_last_error(char *buf, size_t capacity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *md_version(void);

/**
 * Builds a demand matrix on `n` nodes from `m` weighted edges `(us[i], vs[i], ws[i])`.
 *
 * # Safety
 * `us`, `vs` and `ws` must each hold `m` readable elements; `out` must be
 * writable.
 */
enum MdStatus md_demand_new(size_t n,
                            const size_t *us,
                            const size_t *vs,
                            const double *ws,
                            size_t m,
                            struct MdDemand **out);

/**
 * Reads the demand matrix of an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MdStatus md_demand_load(const char *path, struct MdDemand **out);

/**
 * # Safety
 * `demand` must be null or a handle from this library not yet freed.
 */
void md_demand_free(struct MdDemand *demand);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `demand` must be null or a live handle.
 */
size_t md_demand_node_count(const struct MdDemand *demand);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `demand` must be null or a live handle.
 */
size_t md_demand_edge_count(const struct MdDemand *demand);

/**
 * Maximum-weight matching of the demand graph. Writes up to `capacity`
 * edges, the number of edges to `count` and the total weight to `weight`.
 * Returns [`MdStatus::BufferTooSmall`] (with `count` set) if the buffers
 * are too short.
 *
 * # Safety
 * `us` and `vs` must hold `capacity` writable elements (or be null when
 * `capacity` is 0); `count` and `weight` must be writable.
 */
enum MdStatus md_max_weight_matching(const struct MdDemand *demand,
                                     size_t *us,
                                     size_t *vs,
                                     size_t capacity,
                                     size_t *count,
                                     double *weight);

/**
 * New engine settings. `d` is the number of sampled matchings per
 * iteration; it must be positive for the sampling methods and is ignored
 * for [`MdMethod::Exact`].
 *
 * # Safety
 * `out` must be writable.
 */
enum MdStatus md_config_new(enum MdMethod method, size_t d, uint64_t seed, struct MdConfig **out);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void md_config_free(struct MdConfig *config);

/**
 * Sets the target approximation error (positive).
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MdStatus md_config_set_epsilon(struct MdConfig *config, double epsilon);

/**
 * Sets the iteration cap; 0 restores the default of four times the node count.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MdStatus md_config_set_max_iterations(struct MdConfig *config, size_t max_iterations);

/**
 * Sets the number of bitstrings drawn per sampling call; 0 restores the
 * method default.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MdStatus md_config_set_shots(struct MdConfig *config, size_t shots);

/**
 * Fixes the QAOA angles instead of searching for them.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum MdStatus md_config_set_qaoa_angles(struct MdConfig *config, double gamma, double beta);

/**
 * Decomposes `demand` into a convex combination of matchings.
 *
 * # Safety
 * `demand` and `config` must be live handles; `out` must be writable.
 */
enum MdStatus md_decompose(const struct MdDemand *demand,
                           const struct MdConfig *config,
                           struct MdResult **out);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
void md_result_free(struct MdResult *result);

/**
 * Number of matchings in the decomposition, or 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t md_result_length(const struct MdResult *result);

/**
 * Final approximation error, or NaN for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
double md_result_error(const struct MdResult *result);

/**
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum MdStatus md_result_termination(const struct MdResult *result, enum MdTermination *out);

/**
 * Number of points in the error trace.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t md_result_trace_len(const struct MdResult *result);

/**
 * Reads trace point `index`: decomposition length and error.
 *
 * # Safety
 * `result` must be a live handle; `length` and `error` must be writable.
 */
enum MdStatus md_result_trace_point(const struct MdResult *result,
                                    size_t index,
                                    size_t *length,
                                    double *error);

/**
 * Reads decomposition entry `index`: its coefficient, edge count and up
 * to `capacity` edges. Behaves like [`md_max_weight_matching`] when the
 * buffers are short.
 *
 * # Safety
 * `result` must be a live handle; `us`/`vs` must hold `capacity` writable
 * elements; `count` and `weight` must be writable.
 */
enum MdStatus md_result_entry(const struct MdResult *result,
                              size_t index,
                              size_t *us,
                              size_t *vs,
                              size_t capacity,
                              size_t *count,
                              double *weight);

/**
 * Writes the result as JSON to `path`.
 *
 * # Safety
 * `result` must be a live handle; `path` a NUL-terminated string.
 */
enum MdStatus md_result_save_json(const struct MdResult *result, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MATCHDECOMP_H */
