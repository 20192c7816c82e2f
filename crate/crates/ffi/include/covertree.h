#ifndef COVERTREE_H
#define COVERTREE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of every fallible call.
 */
typedef enum CtStatus {
  CT_STATUS_OK = 0,
  CT_STATUS_NULL_POINTER = 1,
  CT_STATUS_INVALID_ARGUMENT = 2,
  CT_STATUS_MALFORMED_GRAPH = 3,
  CT_STATUS_DISCONNECTED = 4,
  CT_STATUS_NOT_CONVERGED = 5,
  CT_STATUS_NOT_BULK = 6,
  CT_STATUS_TOO_LARGE = 7,
  CT_STATUS_BUFFER_TOO_SMALL = 8,
  CT_STATUS_IO = 9,
  CT_STATUS_INTERNAL = 10,
} CtStatus;

/**
 * Classification of a boundary value `ζ^{λ+i0}`.
 */
typedef enum CtClassification {
  CT_CLASSIFICATION_BULK = 0,
  CT_CLASSIFICATION_GAP = 1,
  CT_CLASSIFICATION_POLE = 2,
  CT_CLASSIFICATION_UNDETERMINED = 3,
} CtClassification;

/**
 * A graph with a real potential.
 */
typedef struct CtGraph CtGraph;

/**
 * Boundary values of `ζ` on the directed edges of a graph at one energy.
 */
typedef struct CtZeta CtZeta;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *ct_last_error(void);

/**
 * Library version as a static string.
 */
const char *ct_version(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ct_string_free(char *s);

/**
 * Builds a connected graph on vertices `0..n_vertices`. `edges` holds
 * `2 * n_edges` endpoints; `potential` holds `n_vertices` values.
 *
 * # Safety
 * The arrays must be valid for the given lengths; `out` must be writable.
 */
enum CtStatus ct_graph_new(size_t n_vertices,
                           const uint32_t *edges,
                           size_t n_edges,
                           const double *potential,
                           struct CtGraph **out);

/**
 * Parses a graph from `{"vertices":[{"id":0,"w":0.0},...],"edges":[[0,1],...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CtStatus ct_graph_from_json(const char *json, struct CtGraph **out);

/**
 * Serializes a graph to JSON.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum CtStatus ct_graph_to_json(const struct CtGraph *g, char **out);

/**
 * # Safety
 * `g` must come from this library and not be freed twice.
 */
void ct_graph_free(struct CtGraph *g);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t ct_graph_vertex_count(const struct CtGraph *g);

/**
 * Number of directed edges, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live graph handle.
 */
size_t ct_graph_directed_edge_count(const struct CtGraph *g);

/**
 * Origin and terminus of directed edge `b`.
 *
 * # Safety
 * `g` must be a live graph handle; `origin` and `terminus` must be writable.
 */
enum CtStatus ct_graph_directed_edge(const struct CtGraph *g,
                                     size_t b,
                                     size_t *origin,
                                     size_t *terminus);

/**
 * Boundary values `ζ^{λ+i0}` with default solver settings.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum CtStatus ct_zeta_boundary(const struct CtGraph *g, double lambda, struct CtZeta **out);

/**
 * # Safety
 * `z` must come from this library and not be freed twice.
 */
void ct_zeta_free(struct CtZeta *z);

/**
 * # Safety
 * `z` must be a live handle; `out` must be writable.
 */
enum CtStatus ct_zeta_classification(const struct CtZeta *z, enum CtClassification *out);

/**
 * Copies `ζ` per directed edge into `re` and `im`, each of length `len`
 * (at least the directed edge count).
 *
 * # Safety
 * `re` and `im` must be writable for `len` values.
 */
enum CtStatus ct_zeta_values(const struct CtZeta *z, double *re, double *im, size_t len);

/**
 * `z_λ = min_b |Im ζ_b|`; fails with `NOT_BULK` off the bulk.
 *
 * # Safety
 * `z` must be a live handle; `out` must be writable.
 */
enum CtStatus ct_z_lambda(const struct CtZeta *z, double *out);

/**
 * `Z_{s,λ}` for `s > 1`.
 *
 * # Safety
 * `g` must be the graph `z` was computed on; `out` must be writable.
 */
enum CtStatus ct_z_s(const struct CtGraph *g, const struct CtZeta *z, double s, double *out);

/**
 * Band structure of the cover as JSON.
 *
 * # Safety
 * `g` must be a live graph handle; `out` must be writable.
 */
enum CtStatus ct_band_scan_json(const struct CtGraph *g, double grid_step, char **out);

/**
 * Classifies every eigenpair and checks the delocalization bounds. Writes
 * the report as JSON and whether every check passed.
 *
 * # Safety
 * `g` must be a live graph handle; `out` and `passed` must be writable.
 */
enum CtStatus ct_verify_json(const struct CtGraph *g, double grid_step, char **out, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVERTREE_H */
