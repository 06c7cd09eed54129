//! Boundary bases for every node of a rooted branch-decomposition and the
//! transcript (ordered bases plus transition matrices) that the dynamic
//! program runs on.
//!
//! The basis pass works on index sets of the RREF matrix only: P_v tracks a
//! column basis of the off-pivot block on v's side, R_v a row basis of the
//! complementary block, merged bottom-up. A node whose combined count
//! exceeds the cap aborts the pass; the caller treats that as "the given
//! decomposition is wider than the cap", an expected outcome inside the
//! compression loop.

use crate::arrangement::Arrangement;
use crate::bdtree::DecTree;
use crate::linalg::Mat;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptError {
    WidthExceeded { node: usize, cap: usize },
    NotRooted,
    ExtensionFailure(String),
}

impl fmt::Display for TranscriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranscriptError::WidthExceeded { node, cap } => {
                write!(f, "boundary basis at node {node} exceeds the cap {cap}")
            }
            TranscriptError::NotRooted => write!(f, "transcript needs a rooted decomposition"),
            TranscriptError::ExtensionFailure(s) => write!(f, "basis extension failed: {s}"),
        }
    }
}

impl std::error::Error for TranscriptError {}

/// Per-node ambient basis columns of the boundary space
/// span(V_v) meet span(V - V_v).
pub struct BoundaryBases {
    pub basis: Vec<Mat>,
}

/// A transcript: per node the ordered basis of B_v, the extended ordered
/// basis B_v' (for an internal node, of B_w1 + B_w2), and for each
/// non-root node the transition matrix into the parent's extended basis.
pub struct Transcript {
    pub basis: Vec<Mat>,
    pub basis_prime: Vec<Mat>,
    /// `trans[v]` satisfies `basis_prime[parent(v)] * trans[v] = basis[v]`.
    pub trans: Vec<Option<Mat>>,
    pub parent: Vec<Option<usize>>,
    pub postorder: Vec<usize>,
}

impl Transcript {
    /// Order of the transcript: the largest extended basis.
    pub fn order(&self) -> usize {
        self.basis_prime.iter().map(Mat::cols).max().unwrap_or(0)
    }
}

/// Bottom-up P/R bookkeeping yielding a basis of every boundary space, or
/// an abort when some boundary exceeds `cap`.
pub fn boundary_bases(
    t: &DecTree,
    a: &Arrangement,
    cap: usize,
) -> Result<BoundaryBases, TranscriptError> {
    let (parent, postorder) = t.orient().map_err(|_| TranscriptError::NotRooted)?;
    let m = a.mat();
    let pivots = a.pivots();
    let all_cols = a.cols();
    // parts below each node, then their columns
    let mut parts_below: Vec<Vec<usize>> = vec![Vec::new(); t.n()];
    for &v in &postorder {
        if let Some(p) = t.label(v) {
            parts_below[v] = vec![p];
        } else {
            let mut acc = Vec::new();
            for &w in t.neighbors(v) {
                if parent[w] == Some(v) {
                    acc.extend_from_slice(&parts_below[w]);
                }
            }
            acc.sort_unstable();
            parts_below[v] = acc;
        }
    }
    let e_v: Vec<Vec<usize>> = (0..t.n())
        .map(|v| {
            let mut cols = Vec::new();
            for &p in &parts_below[v] {
                cols.extend(a.part_cols(p));
            }
            cols.sort_unstable();
            cols
        })
        .collect();
    let is_pivot = |c: usize| pivots.binary_search(&c).is_ok();

    let mut p_sets: Vec<Vec<usize>> = vec![Vec::new(); t.n()];
    let mut r_sets: Vec<Vec<usize>> = vec![Vec::new(); t.n()];
    let mut basis: Vec<Mat> = vec![Mat::zero(a.rows(), 0, a.spec()); t.n()];

    for &v in &postorder {
        let ev = &e_v[v];
        let in_ev = |c: usize| ev.binary_search(&c).is_ok();
        let rows_b_minus_ev: Vec<usize> = (0..a.rows()).filter(|&r| !in_ev(pivots[r])).collect();
        let rows_b_cap_ev: Vec<usize> = (0..a.rows()).filter(|&r| in_ev(pivots[r])).collect();
        let out_cols: Vec<usize> = (0..all_cols)
            .filter(|&c| !in_ev(c) && !is_pivot(c))
            .collect();

        let children: Vec<usize> = t
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| parent[w] == Some(v))
            .collect();
        let (p_v, r_v) = if children.is_empty() {
            let cand_cols: Vec<usize> = ev.iter().copied().filter(|&c| !is_pivot(c)).collect();
            let p = basis_cols(m, &rows_b_minus_ev, &cand_cols);
            let r = basis_rows(m, &rows_b_cap_ev, &out_cols);
            (p, r)
        } else {
            let mut cand_cols = Vec::new();
            for &w in &children {
                cand_cols.extend_from_slice(&p_sets[w]);
            }
            cand_cols.sort_unstable();
            cand_cols.dedup();
            let p = basis_cols(m, &rows_b_minus_ev, &cand_cols);
            let mut cand_rows = Vec::new();
            for &w in &children {
                cand_rows.extend_from_slice(&r_sets[w]);
            }
            cand_rows.sort_unstable();
            cand_rows.dedup();
            let r = basis_rows(m, &cand_rows, &out_cols);
            (p, r)
        };
        if p_v.len() + r_v.len() > cap {
            return Err(TranscriptError::WidthExceeded { node: v, cap });
        }
        // Q_v: column basis of M[R_v, E - (E_v cup B)]
        let q_v = basis_cols(m, &r_v, &out_cols);
        // boundary basis: I_{B - E_v} M[P_v] columns then I_{B cap E_v} M[Q_v]
        let mut b = Mat::zero(a.rows(), 0, a.spec());
        for &c in &p_v {
            let mut col = Mat::zero(a.rows(), 1, a.spec());
            for &r in &rows_b_minus_ev {
                col[(r, 0)] = m[(r, c)];
            }
            b = b.hcat(&col);
        }
        for &c in &q_v {
            let mut col = Mat::zero(a.rows(), 1, a.spec());
            for &r in &rows_b_cap_ev {
                col[(r, 0)] = m[(r, c)];
            }
            b = b.hcat(&col);
        }
        basis[v] = b;
        p_sets[v] = p_v;
        let mut r_sorted = r_v;
        r_sorted.sort_unstable();
        r_sets[v] = r_sorted;
    }
    Ok(BoundaryBases { basis })
}

/// Greedy column basis of M[rows, among cand_cols], returned as column ids.
fn basis_cols(m: &Mat, rows: &[usize], cand_cols: &[usize]) -> Vec<usize> {
    let sub = m.submatrix(rows, cand_cols);
    let picked = sub.col_basis_of(&(0..cand_cols.len()).collect::<Vec<_>>());
    picked.into_iter().map(|j| cand_cols[j]).collect()
}

/// Greedy row basis of M[rows, cols], returned as row ids.
fn basis_rows(m: &Mat, rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let sub = m.submatrix(rows, cols);
    let picked = sub.row_basis_of(
        &(0..rows.len()).collect::<Vec<_>>(),
        &(0..cols.len()).collect::<Vec<_>>(),
    );
    picked.into_iter().map(|i| rows[i]).collect()
}

/// Build the transcript: for every internal node an ordered basis of the
/// children's boundary sum extending the node's own basis, and transition
/// matrices solving (B') T = (B_child).
pub fn build_transcript(
    t: &DecTree,
    a: &Arrangement,
    bases: &BoundaryBases,
) -> Result<Transcript, TranscriptError> {
    let (parent, postorder) = t.orient().map_err(|_| TranscriptError::NotRooted)?;
    let mut children = vec![Vec::new(); t.n()];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(v);
        }
    }
    let mut basis_prime: Vec<Mat> = vec![Mat::zero(a.rows(), 0, a.spec()); t.n()];
    for &v in &postorder {
        if children[v].is_empty() {
            basis_prime[v] = bases.basis[v].clone();
        } else {
            let mut stacked = bases.basis[v].clone();
            for &w in &children[v] {
                stacked = stacked.hcat(&bases.basis[w]);
            }
            let picked = stacked.col_basis_of(&(0..stacked.cols()).collect::<Vec<_>>());
            // the node's own basis columns are independent and leftmost, so
            // the greedy pick keeps them first
            if picked.len() < bases.basis[v].cols()
                || picked[..bases.basis[v].cols()]
                    .iter()
                    .enumerate()
                    .any(|(i, &c)| c != i)
            {
                return Err(TranscriptError::ExtensionFailure(format!(
                    "boundary basis at node {v} is not independent"
                )));
            }
            basis_prime[v] = stacked.columns(&picked);
        }
    }
    let mut trans: Vec<Option<Mat>> = vec![None; t.n()];
    for v in 0..t.n() {
        if let Some(p) = parent[v] {
            let sol = basis_prime[p].solve(&bases.basis[v]).ok_or_else(|| {
                TranscriptError::ExtensionFailure(format!(
                    "child basis at {v} not inside the parent's extended span"
                ))
            })?;
            trans[v] = Some(sol);
        }
    }
    Ok(Transcript {
        basis: bases.basis.clone(),
        basis_prime,
        trans,
        parent,
        postorder,
    })
}
