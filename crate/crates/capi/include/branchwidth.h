/* C interface of the branchwidth solver.
 *
 * Regenerate with: cbindgen --crate branchwidth-capi --output include/branchwidth.h
 * (the committed copy is kept in sync by hand; see cbindgen.toml).
 */

#ifndef BRANCHWIDTH_H
#define BRANCHWIDTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define BW_OK 0
#define BW_INPUT 2
#define BW_ABOVE_K 10
#define BW_REJECTED 11
#define BW_RESOURCE 12
#define BW_INTERNAL 70

/* Opaque decomposition result. */
typedef struct BwResult BwResult;

#ifdef __cplusplus
extern "C" {
#endif

/* Solve a subspace arrangement given as a row-major r x m matrix over GF(p)
 * with n consecutive parts. On BW_OK, *out owns the result. */
int32_t bw_solve_arrangement(uint32_t p,
                             uintptr_t r,
                             uintptr_t m,
                             uintptr_t n,
                             const uint16_t *entries,
                             const uintptr_t *part_sizes,
                             uintptr_t k,
                             uintptr_t node_cap,
                             BwResult **out);

/* Rank-width: decide whether the graph has rank-width at most k and build a
 * rank-decomposition (leaves are 0-based vertices). Edge endpoints are
 * 0-based, flattened pairs. */
int32_t bw_solve_rankwidth(uintptr_t n_vertices,
                           uintptr_t n_edges,
                           const uintptr_t *endpoints,
                           uintptr_t k,
                           uintptr_t node_cap,
                           BwResult **out);

/* Carving-width at most k; leaves are 0-based vertices. */
int32_t bw_solve_carving(uintptr_t n_vertices,
                         uintptr_t n_edges,
                         const uintptr_t *endpoints,
                         uintptr_t k,
                         uintptr_t node_cap,
                         BwResult **out);

/* Hypergraph branch-width at most k. Edges come flattened: edge_sizes holds
 * n_edges lengths, vertices the concatenated 0-based members. Leaves of the
 * result are 0-based edge indices of the input. */
int32_t bw_solve_hyperbw(uintptr_t n_vertices,
                         uintptr_t n_edges,
                         const uintptr_t *edge_sizes,
                         const uintptr_t *vertices,
                         uintptr_t k,
                         uintptr_t node_cap,
                         BwResult **out);

/* Number of tree nodes in the result. */
uintptr_t bw_result_node_count(const BwResult *res);

/* Number of tree edges in the result. */
uintptr_t bw_result_edge_count(const BwResult *res);

/* Copy the edge list as flattened (u, v) pairs of 0-based node ids. buf must
 * hold 2 * bw_result_edge_count values. */
int32_t bw_result_edges(const BwResult *res, uintptr_t *buf);

/* Copy per-node labels: the 0-based part index at leaves, -1 at internal
 * nodes. buf must hold bw_result_node_count values. */
int32_t bw_result_labels(const BwResult *res, intptr_t *buf);

/* Release a result handle. */
void bw_result_free(BwResult *res);

/* Static version string of the library. */
const char *bw_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BRANCHWIDTH_H */
