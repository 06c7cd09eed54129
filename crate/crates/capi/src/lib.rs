//! C ABI over the branchwidth solver.
//!
//! Every solver call returns a status code (mirroring the CLI exit codes)
//! and, on success, an opaque result handle holding the decomposition tree.
//! Handles must be released with `bw_result_free`. All functions are safe
//! to call from multiple threads on distinct data; handles are not
//! internally synchronized.

use branchwidth::bdtree::DecTree;
use branchwidth::field::FieldSpec;
use branchwidth::frontends::{
    carving_arrangement, hypergraph_arrangement, rankwidth_arrangement, reinsert_parallel, solve,
    Graph, Hypergraph,
};
use branchwidth::fullset::{Outcome, SolveError};
use branchwidth::linalg::Mat;
use std::os::raw::c_char;

pub const BW_OK: i32 = 0;
pub const BW_INPUT: i32 = 2;
pub const BW_ABOVE_K: i32 = 10;
pub const BW_REJECTED: i32 = 11;
pub const BW_RESOURCE: i32 = 12;
pub const BW_INTERNAL: i32 = 70;

/// Opaque decomposition result.
pub struct BwResult {
    tree: DecTree,
}

fn finish(
    outcome: Result<(Outcome, branchwidth::fullset::SolveStats), SolveError>,
    out: *mut *mut BwResult,
) -> i32 {
    match outcome {
        Ok((Outcome::Decomposition(t), _)) => {
            let boxed = Box::new(BwResult { tree: t });
            unsafe { *out = Box::into_raw(boxed) };
            BW_OK
        }
        Ok((Outcome::AboveK, _)) => BW_ABOVE_K,
        Err(SolveError::ResourceExceeded { .. }) => BW_RESOURCE,
        Err(_) => BW_INTERNAL,
    }
}

/// Solve a subspace arrangement given as a row-major r x m matrix over
/// GF(p) with n consecutive parts. On BW_OK, `*out` owns the result.
///
/// # Safety
/// `entries` must point to r*m readable u16 values, `part_sizes` to n
/// readable usize values summing to m, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bw_solve_arrangement(
    p: u32,
    r: usize,
    m: usize,
    n: usize,
    entries: *const u16,
    part_sizes: *const usize,
    k: usize,
    node_cap: usize,
    out: *mut *mut BwResult,
) -> i32 {
    if entries.is_null() && r * m > 0 {
        return BW_INPUT;
    }
    if part_sizes.is_null() && n > 0 {
        return BW_INPUT;
    }
    if out.is_null() {
        return BW_INPUT;
    }
    let Ok(spec) = FieldSpec::new(p) else {
        return BW_INPUT;
    };
    let data = std::slice::from_raw_parts(entries, r * m);
    if data.iter().any(|&x| x >= spec.modulus()) {
        return BW_INPUT;
    }
    let sizes = std::slice::from_raw_parts(part_sizes, n);
    if sizes.iter().sum::<usize>() != m {
        return BW_INPUT;
    }
    let rows: Vec<Vec<u16>> = (0..r).map(|i| data[i * m..(i + 1) * m].to_vec()).collect();
    let mat = if r == 0 {
        Mat::zero(0, m, spec)
    } else {
        Mat::from_rows(&rows, spec)
    };
    finish(solve(&mat, sizes, k, node_cap, false), out)
}

unsafe fn graph_from_raw(
    n_vertices: usize,
    n_edges: usize,
    endpoints: *const usize,
) -> Option<Graph> {
    if endpoints.is_null() && n_edges > 0 {
        return None;
    }
    let ends = std::slice::from_raw_parts(endpoints, 2 * n_edges);
    let mut edges = Vec::with_capacity(n_edges);
    for i in 0..n_edges {
        let (u, v) = (ends[2 * i], ends[2 * i + 1]);
        if u >= n_vertices || v >= n_vertices || u == v {
            return None;
        }
        edges.push((u, v));
    }
    Some(Graph::new(n_vertices, edges))
}

/// Rank-width: decide whether the graph has rank-width at most k and build
/// a rank-decomposition (leaves are 0-based vertices). Edge endpoints are
/// 0-based, flattened pairs.
///
/// # Safety
/// `endpoints` must point to 2*n_edges readable usize values; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bw_solve_rankwidth(
    n_vertices: usize,
    n_edges: usize,
    endpoints: *const usize,
    k: usize,
    node_cap: usize,
    out: *mut *mut BwResult,
) -> i32 {
    if out.is_null() {
        return BW_INPUT;
    }
    let Some(g) = graph_from_raw(n_vertices, n_edges, endpoints) else {
        return BW_INPUT;
    };
    let (mat, sizes) = rankwidth_arrangement(&g);
    finish(solve(&mat, &sizes, 2 * k, node_cap, false), out)
}

/// Carving-width at most k; leaves are 0-based vertices.
///
/// # Safety
/// As for `bw_solve_rankwidth`.
#[no_mangle]
pub unsafe extern "C" fn bw_solve_carving(
    n_vertices: usize,
    n_edges: usize,
    endpoints: *const usize,
    k: usize,
    node_cap: usize,
    out: *mut *mut BwResult,
) -> i32 {
    if out.is_null() {
        return BW_INPUT;
    }
    let Some(g) = graph_from_raw(n_vertices, n_edges, endpoints) else {
        return BW_INPUT;
    };
    match carving_arrangement(&g, k) {
        Ok((mat, sizes)) => finish(solve(&mat, &sizes, k, node_cap, false), out),
        Err(_) => BW_REJECTED,
    }
}

/// Hypergraph branch-width at most k. Edges come flattened: `edge_sizes`
/// holds n_edges lengths, `vertices` the concatenated 0-based members.
/// Leaves of the result are 0-based edge indices of the input.
///
/// # Safety
/// `edge_sizes` must point to n_edges readable values and `vertices` to
/// their sum; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bw_solve_hyperbw(
    n_vertices: usize,
    n_edges: usize,
    edge_sizes: *const usize,
    vertices: *const usize,
    k: usize,
    node_cap: usize,
    out: *mut *mut BwResult,
) -> i32 {
    if out.is_null() || (edge_sizes.is_null() && n_edges > 0) {
        return BW_INPUT;
    }
    let sizes = std::slice::from_raw_parts(edge_sizes, n_edges);
    let total: usize = sizes.iter().sum();
    if vertices.is_null() && total > 0 {
        return BW_INPUT;
    }
    let flat = std::slice::from_raw_parts(vertices, total);
    let mut edges = Vec::with_capacity(n_edges);
    let mut at = 0;
    for &s in sizes {
        if s == 0 {
            return BW_INPUT;
        }
        let e: Vec<usize> = flat[at..at + s].to_vec();
        if e.iter().any(|&v| v >= n_vertices) {
            return BW_INPUT;
        }
        edges.push(e);
        at += s;
    }
    let h = Hypergraph::new(n_vertices, edges);
    let red = match hypergraph_arrangement(&h, k) {
        Ok(r) => r,
        Err(_) => return BW_REJECTED,
    };
    match solve(&red.mat, &red.sizes, k, node_cap, false) {
        Ok((Outcome::Decomposition(t), _)) => {
            let labels: Vec<Option<usize>> = (0..t.n())
                .map(|v| t.label(v).map(|p| red.kept[p]))
                .collect();
            let relabeled = DecTree::from_edges(&t.edges(), labels);
            let full = reinsert_parallel(&relabeled, &red.dupes);
            let boxed = Box::new(BwResult { tree: full });
            *out = Box::into_raw(boxed);
            BW_OK
        }
        Ok((Outcome::AboveK, _)) => BW_ABOVE_K,
        Err(SolveError::ResourceExceeded { .. }) => BW_RESOURCE,
        Err(_) => BW_INTERNAL,
    }
}

/// Number of tree nodes in the result.
///
/// # Safety
/// `res` must be a live handle from a solver call.
#[no_mangle]
pub unsafe extern "C" fn bw_result_node_count(res: *const BwResult) -> usize {
    if res.is_null() {
        return 0;
    }
    (*res).tree.n()
}

/// Number of tree edges in the result.
///
/// # Safety
/// `res` must be a live handle from a solver call.
#[no_mangle]
pub unsafe extern "C" fn bw_result_edge_count(res: *const BwResult) -> usize {
    if res.is_null() {
        return 0;
    }
    (*res).tree.edges().len()
}

/// Copy the edge list as flattened (u, v) pairs of 0-based node ids.
///
/// # Safety
/// `buf` must hold 2 * bw_result_edge_count values.
#[no_mangle]
pub unsafe extern "C" fn bw_result_edges(res: *const BwResult, buf: *mut usize) -> i32 {
    if res.is_null() || buf.is_null() {
        return BW_INPUT;
    }
    let edges = (*res).tree.edges();
    let out = std::slice::from_raw_parts_mut(buf, 2 * edges.len());
    for (i, (u, v)) in edges.into_iter().enumerate() {
        out[2 * i] = u;
        out[2 * i + 1] = v;
    }
    BW_OK
}

/// Copy per-node labels: the 0-based part index at leaves, -1 at internal
/// nodes.
///
/// # Safety
/// `buf` must hold bw_result_node_count values.
#[no_mangle]
pub unsafe extern "C" fn bw_result_labels(res: *const BwResult, buf: *mut isize) -> i32 {
    if res.is_null() || buf.is_null() {
        return BW_INPUT;
    }
    let t = &(*res).tree;
    let out = std::slice::from_raw_parts_mut(buf, t.n());
    for (v, slot) in out.iter_mut().enumerate() {
        *slot = t.label(v).map_or(-1, |p| p as isize);
    }
    BW_OK
}

/// Release a result handle.
///
/// # Safety
/// `res` must be a handle from a solver call, released at most once.
#[no_mangle]
pub unsafe extern "C" fn bw_result_free(res: *mut BwResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Static version string of the library.
#[no_mangle]
pub extern "C" fn bw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrangement_roundtrip_through_the_abi() {
        // identity 3x3, three singleton parts, k = 0
        let entries: Vec<u16> = vec![1, 0, 0, 0, 1, 0, 0, 0, 1];
        let sizes: Vec<usize> = vec![1, 1, 1];
        let mut res: *mut BwResult = std::ptr::null_mut();
        let code = unsafe {
            bw_solve_arrangement(
                2,
                3,
                3,
                3,
                entries.as_ptr(),
                sizes.as_ptr(),
                0,
                64,
                &mut res,
            )
        };
        assert_eq!(code, BW_OK);
        let nodes = unsafe { bw_result_node_count(res) };
        let ecount = unsafe { bw_result_edge_count(res) };
        assert!(nodes >= 3 && ecount + 1 == nodes);
        let mut labels = vec![0isize; nodes];
        assert_eq!(unsafe { bw_result_labels(res, labels.as_mut_ptr()) }, BW_OK);
        let mut parts: Vec<isize> = labels.iter().copied().filter(|&x| x >= 0).collect();
        parts.sort_unstable();
        assert_eq!(parts, vec![0, 1, 2]);
        let mut edges = vec![0usize; 2 * ecount];
        assert_eq!(unsafe { bw_result_edges(res, edges.as_mut_ptr()) }, BW_OK);
        unsafe { bw_result_free(res) };
    }

    #[test]
    fn status_codes() {
        let mut res: *mut BwResult = std::ptr::null_mut();
        // composite modulus
        let code = unsafe {
            bw_solve_arrangement(
                4,
                0,
                0,
                0,
                std::ptr::null(),
                std::ptr::null(),
                1,
                64,
                &mut res,
            )
        };
        assert_eq!(code, BW_INPUT);
        // K4 carving at k = 1: degree guard fires
        let ends: Vec<usize> = vec![0, 1, 0, 2, 0, 3, 1, 2, 1, 3, 2, 3];
        let code = unsafe { bw_solve_carving(4, 6, ends.as_ptr(), 1, 64, &mut res) };
        assert_eq!(code, BW_REJECTED);
        // K4 carving at k = 3: above k but no guard
        let code = unsafe { bw_solve_carving(4, 6, ends.as_ptr(), 3, 64, &mut res) };
        assert_eq!(code, BW_ABOVE_K);
        // and at k = 4 it solves
        let code = unsafe { bw_solve_carving(4, 6, ends.as_ptr(), 4, 64, &mut res) };
        assert_eq!(code, BW_OK);
        unsafe { bw_result_free(res) };
    }

    #[test]
    fn rankwidth_and_hypergraph_through_the_abi() {
        // P4 has rank-width 1
        let ends: Vec<usize> = vec![0, 1, 1, 2, 2, 3];
        let mut res: *mut BwResult = std::ptr::null_mut();
        assert_eq!(
            unsafe { bw_solve_rankwidth(4, 3, ends.as_ptr(), 1, 64, &mut res) },
            BW_OK
        );
        unsafe { bw_result_free(res) };
        assert_eq!(
            unsafe { bw_solve_rankwidth(4, 3, ends.as_ptr(), 0, 64, &mut res) },
            BW_ABOVE_K
        );
        // triangle hypergraph at k = 2
        let sizes: Vec<usize> = vec![2, 2, 2];
        let verts: Vec<usize> = vec![0, 1, 1, 2, 0, 2];
        let code =
            unsafe { bw_solve_hyperbw(3, 3, sizes.as_ptr(), verts.as_ptr(), 2, 64, &mut res) };
        assert_eq!(code, BW_OK);
        assert_eq!(unsafe { bw_result_node_count(res) }, 4);
        unsafe { bw_result_free(res) };
    }
}
