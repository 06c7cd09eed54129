//! Reductions of the four width parameters to subspace-arrangement
//! branch-width, together with the direct connectivity evaluators used to
//! re-verify emitted decompositions.

use crate::arrangement::{preprocess, Arrangement};
use crate::bdtree::DecTree;
use crate::field::FieldSpec;
use crate::fullset::{iterative_compression, Outcome, SolveError, SolveStats};
use crate::linalg::Mat;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Graph {
        for &(u, v) in &edges {
            assert!(u < n && v < n && u != v, "bad edge ({u},{v})");
        }
        Graph { n, edges }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Adjacency column of vertex i over GF(2).
    fn adjacency_col(&self, i: usize) -> Vec<u16> {
        let mut col = vec![0u16; self.n];
        for &(a, b) in &self.edges {
            if a == i {
                col[b] = 1;
            }
            if b == i {
                col[a] = 1;
            }
        }
        col
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    pub n: usize,
    /// Each edge is a nonempty sorted vertex set.
    pub edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(n: usize, mut edges: Vec<Vec<usize>>) -> Hypergraph {
        for e in edges.iter_mut() {
            e.sort_unstable();
            e.dedup();
            assert!(!e.is_empty() && e.iter().all(|&v| v < n), "bad hyperedge");
        }
        Hypergraph { n, edges }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reject {
    /// Parallel hyperedges larger than k force width > k.
    Parallel { size: usize },
    /// More edges than 2^(2k) n is impossible at width k.
    Density { m: usize, bound: usize },
    /// A part already meets the rest in dimension > k.
    PartDimension { part: usize, dim: usize },
    /// A vertex of degree > k forces carving-width > k.
    Degree { vertex: usize, degree: usize },
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reject::Parallel { size } => write!(f, "parallel hyperedges of size {size} > k"),
            Reject::Density { m, bound } => write!(f, "{m} edges exceed the bound {bound}"),
            Reject::PartDimension { part, dim } => {
                write!(f, "part {part} meets the rest in dimension {dim} > k")
            }
            Reject::Degree { vertex, degree } => {
                write!(f, "vertex {vertex} has degree {degree} > k")
            }
        }
    }
}

impl std::error::Error for Reject {}

/// One part per column: the arrangement of the vector matroid.
pub fn matroid_arrangement(mat: &Mat) -> (Mat, Vec<usize>) {
    (mat.clone(), vec![1; mat.cols()])
}

/// One subspace per vertex, spanned by its adjacency column and its own
/// standard basis vector; the arrangement's branch-width is exactly twice
/// the rank-width, so callers solve with parameter 2k.
pub fn rankwidth_arrangement(g: &Graph) -> (Mat, Vec<usize>) {
    let f = FieldSpec::gf2();
    let mut cols: Vec<Vec<u16>> = Vec::with_capacity(2 * g.n);
    for i in 0..g.n {
        cols.push(g.adjacency_col(i));
        let mut e = vec![0u16; g.n];
        e[i] = 1;
        cols.push(e);
    }
    let rows: Vec<Vec<u16>> = (0..g.n)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    (Mat::from_rows(&rows, f), vec![2; g.n])
}

/// Output of the hypergraph reduction: the arrangement over the deduplicated
/// edges plus the bookkeeping to reinsert parallel copies afterwards.
pub struct HyperReduction {
    pub mat: Mat,
    pub sizes: Vec<usize>,
    /// Original edge index of each part.
    pub kept: Vec<usize>,
    /// (removed original edge, original twin it parallels).
    pub dupes: Vec<(usize, usize)>,
}

pub fn hypergraph_arrangement(g: &Hypergraph, k: usize) -> Result<HyperReduction, Reject> {
    // parallel edges: same vertex set
    let mut kept: Vec<usize> = Vec::new();
    let mut dupes: Vec<(usize, usize)> = Vec::new();
    for (i, e) in g.edges.iter().enumerate() {
        match kept.iter().find(|&&j| g.edges[j] == *e) {
            Some(&twin) => {
                if e.len() > k {
                    return Err(Reject::Parallel { size: e.len() });
                }
                dupes.push((i, twin));
            }
            None => kept.push(i),
        }
    }
    let m = kept.len();
    let bound = (1usize << (2 * k).min(40)) * g.n;
    if m > bound {
        return Err(Reject::Density { m, bound });
    }
    // V_i spans e_j for vertices of E_i shared with some other edge
    let f = FieldSpec::gf2();
    let mut shared_count = vec![0usize; g.n];
    for &i in &kept {
        for &v in &g.edges[i] {
            shared_count[v] += 1;
        }
    }
    for &(d, _) in &dupes {
        for &v in &g.edges[d] {
            shared_count[v] += 1;
        }
    }
    let mut cols: Vec<Vec<u16>> = Vec::new();
    let mut sizes = Vec::with_capacity(m);
    for (pi, &i) in kept.iter().enumerate() {
        let verts: Vec<usize> = g.edges[i]
            .iter()
            .copied()
            .filter(|&v| shared_count[v] >= 2)
            .collect();
        if verts.len() > k {
            return Err(Reject::PartDimension {
                part: pi,
                dim: verts.len(),
            });
        }
        for v in &verts {
            let mut col = vec![0u16; g.n];
            col[*v] = 1;
            cols.push(col);
        }
        sizes.push(verts.len());
    }
    let rows: Vec<Vec<u16>> = (0..g.n)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let mat = if cols.is_empty() {
        Mat::zero(g.n, 0, f)
    } else {
        Mat::from_rows(&rows, f)
    };
    Ok(HyperReduction {
        mat,
        sizes,
        kept,
        dupes,
    })
}

/// Reattach deduplicated parallel edges next to their twins. The input tree
/// is labeled by original edge indices of the kept edges.
pub fn reinsert_parallel(t: &DecTree, dupes: &[(usize, usize)]) -> DecTree {
    let mut cur = t.clone();
    for &(removed, twin) in dupes {
        cur = attach_next_to(&cur, twin, removed);
    }
    cur
}

fn attach_next_to(t: &DecTree, twin_part: usize, new_part: usize) -> DecTree {
    let w = t.node_of_part(twin_part).expect("twin leaf present");
    if t.n() == 1 {
        return DecTree::from_edges(&[(0, 1)], vec![Some(twin_part), Some(new_part)]);
    }
    let u = t.neighbors(w)[0];
    let mut edges: Vec<(usize, usize)> = t
        .edges()
        .into_iter()
        .filter(|&(a, b)| (a, b) != (w.min(u), w.max(u)))
        .collect();
    let mid = t.n();
    let leaf = t.n() + 1;
    edges.push((w, mid));
    edges.push((mid, u));
    edges.push((mid, leaf));
    let mut labels: Vec<Option<usize>> = (0..t.n()).map(|v| t.label(v)).collect();
    labels.push(None);
    labels.push(Some(new_part));
    DecTree::from_edges(&edges, labels)
}

/// One subspace per vertex, spanned by the standard vectors of its incident
/// edges; branch-width of the arrangement equals carving-width.
pub fn carving_arrangement(g: &Graph, k: usize) -> Result<(Mat, Vec<usize>), Reject> {
    let f = FieldSpec::gf2();
    let m = g.edges.len();
    let mut cols: Vec<Vec<u16>> = Vec::new();
    let mut sizes = Vec::with_capacity(g.n);
    for v in 0..g.n {
        let deg = g.degree(v);
        if deg > k {
            return Err(Reject::Degree {
                vertex: v,
                degree: deg,
            });
        }
        let mut s = 0;
        for (j, &(a, b)) in g.edges.iter().enumerate() {
            if a == v || b == v {
                let mut col = vec![0u16; m];
                col[j] = 1;
                cols.push(col);
                s += 1;
            }
        }
        sizes.push(s);
    }
    let rows: Vec<Vec<u16>> = (0..m)
        .map(|r| cols.iter().map(|c| c[r]).collect())
        .collect();
    let mat = if m == 0 {
        Mat::zero(0, cols.len(), f)
    } else {
        Mat::from_rows(&rows, f)
    };
    Ok((mat, sizes))
}

/// Cut-rank of a vertex subset: rank of the adjacency block between X and
/// its complement over GF(2).
pub fn cut_rank(g: &Graph, x: &[usize]) -> usize {
    let inx = |v: usize| x.contains(&v);
    let comp: Vec<usize> = (0..g.n).filter(|&v| !inx(v)).collect();
    if x.is_empty() || comp.is_empty() {
        return 0;
    }
    let mut rows = Vec::new();
    for &v in x {
        let col = g.adjacency_col(v);
        rows.push(comp.iter().map(|&w| col[w]).collect::<Vec<u16>>());
    }
    Mat::from_rows(&rows, FieldSpec::gf2()).rank()
}

/// Max cut-rank over the edges of a decomposition whose leaves are
/// vertices.
pub fn rank_decomposition_width(g: &Graph, t: &DecTree) -> usize {
    t.edges()
        .into_iter()
        .map(|(u, v)| cut_rank(g, &t.side_parts(v, u)))
        .max()
        .unwrap_or(0)
}

/// Number of edges crossing a vertex bipartition.
pub fn carving_cut(g: &Graph, x: &[usize]) -> usize {
    let inx = |v: usize| x.contains(&v);
    g.edges.iter().filter(|&&(a, b)| inx(a) != inx(b)).count()
}

pub fn carving_width_of(g: &Graph, t: &DecTree) -> usize {
    t.edges()
        .into_iter()
        .map(|(u, v)| carving_cut(g, &t.side_parts(v, u)))
        .max()
        .unwrap_or(0)
}

/// Number of vertices incident with edges on both sides of a hyperedge
/// bipartition.
pub fn hyper_cut(g: &Hypergraph, x: &[usize]) -> usize {
    let inx = |e: usize| x.contains(&e);
    (0..g.n)
        .filter(|&v| {
            let mut left = false;
            let mut right = false;
            for (j, e) in g.edges.iter().enumerate() {
                if e.contains(&v) {
                    if inx(j) {
                        left = true;
                    } else {
                        right = true;
                    }
                }
            }
            left && right
        })
        .count()
}

pub fn hyper_width_of(g: &Hypergraph, t: &DecTree) -> usize {
    t.edges()
        .into_iter()
        .map(|(u, v)| hyper_cut(g, &t.side_parts(v, u)))
        .max()
        .unwrap_or(0)
}

/// Full solve pipeline for a raw (matrix, parts) instance: preprocessing,
/// compression loop, decomposition labeled by the input's part indices. A
/// preprocessing rejection is already a proof that the width exceeds k.
pub fn solve(
    mat: &Mat,
    sizes: &[usize],
    k: usize,
    node_cap: usize,
    trace: bool,
) -> Result<(Outcome, SolveStats), SolveError> {
    match preprocess(mat, sizes, k) {
        Ok(pre) => iterative_compression(&pre, k, node_cap, trace),
        Err(_) => Ok((
            Outcome::AboveK,
            SolveStats {
                dp_runs: 0,
                max_table: 0,
                trace: Vec::new(),
            },
        )),
    }
}

/// Decision + witness for the branch-width of a raw instance at k, as the
/// arrangement evaluator sees it.
pub fn arrangement_width_of(mat: &Mat, sizes: &[usize], t: &DecTree) -> usize {
    let a = Arrangement::new(mat, sizes);
    t.width(&a).expect("labels fit").0
}
