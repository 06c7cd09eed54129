//! Branch-decomposition trees: width evaluation, induced subdecompositions,
//! canonical and reduced namus, the purity predicates relative to a base
//! decomposition, and the fork/split transformations.

use crate::arrangement::Arrangement;
use crate::linalg::Subspace;
use crate::namu::{BNamu, Tree};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BdError {
    LabelMismatch(String),
    EmptySubset,
    Unrooted,
    AmbientMismatch,
    ScopeMismatch(String),
    PreconditionViolated(String),
}

/// Per-edge widths keyed by the edge's endpoints.
pub type EdgeWidths = Vec<((usize, usize), usize)>;

impl fmt::Display for BdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BdError::LabelMismatch(s) => write!(f, "leaf labels do not fit the arrangement: {s}"),
            BdError::EmptySubset => write!(f, "induced subdecomposition needs a nonempty subset"),
            BdError::Unrooted => write!(f, "operation requires a rooted tree"),
            BdError::AmbientMismatch => write!(f, "subspace lives in the wrong ambient space"),
            BdError::ScopeMismatch(s) => write!(f, "scope mismatch: {s}"),
            BdError::PreconditionViolated(s) => write!(f, "precondition violated: {s}"),
        }
    }
}

impl std::error::Error for BdError {}

/// A (rooted or unrooted) subcubic decomposition tree with leaves labeled
/// by part indices. Node ids are dense; rebuilding operations renumber
/// deterministically.
#[derive(Clone, PartialEq, Eq)]
pub struct DecTree {
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<usize>>,
    root: Option<usize>,
}

impl fmt::Debug for DecTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DecTree(n={}, edges={:?}, labels={:?}",
            self.n(),
            self.edges(),
            self.labels
        )?;
        if let Some(r) = self.root {
            write!(f, ", root={r}")?;
        }
        write!(f, ")")
    }
}

impl DecTree {
    pub fn single(part: usize) -> DecTree {
        DecTree {
            adj: vec![Vec::new()],
            labels: vec![Some(part)],
            root: None,
        }
    }

    pub fn two(p: usize, q: usize) -> DecTree {
        DecTree {
            adj: vec![vec![1], vec![0]],
            labels: vec![Some(p), Some(q)],
            root: None,
        }
    }

    pub fn from_edges(edges: &[(usize, usize)], labels: Vec<Option<usize>>) -> DecTree {
        let n = labels.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        DecTree {
            adj,
            labels,
            root: None,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn root(&self) -> Option<usize> {
        self.root
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn label(&self, v: usize) -> Option<usize> {
        self.labels[v]
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.degree(v) <= 1).collect()
    }

    /// Sorted part indices carried by the leaves.
    pub fn parts(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.labels.iter().flatten().copied().collect();
        p.sort_unstable();
        p
    }

    pub fn node_of_part(&self, part: usize) -> Option<usize> {
        (0..self.n()).find(|&v| self.labels[v] == Some(part))
    }

    /// Edges as sorted (lo, hi) pairs, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Structural sanity: subcubic, no degree-2 node except the root,
    /// labels exactly on leaves and pairwise distinct.
    pub fn check(&self) -> Result<(), BdError> {
        let mut seen = BTreeSet::new();
        for v in 0..self.n() {
            let d = self.degree(v);
            if d > 3 {
                return Err(BdError::LabelMismatch(format!("node {v} has degree {d}")));
            }
            if d == 2 && self.root != Some(v) {
                return Err(BdError::LabelMismatch(format!(
                    "non-root node {v} has degree 2"
                )));
            }
            match self.labels[v] {
                Some(p) => {
                    if d > 1 {
                        return Err(BdError::LabelMismatch(format!("internal node {v} labeled")));
                    }
                    if !seen.insert(p) {
                        return Err(BdError::LabelMismatch(format!("part {p} appears twice")));
                    }
                }
                None => {
                    if d <= 1 && self.n() > 1 && self.root != Some(v) {
                        return Err(BdError::LabelMismatch(format!("leaf {v} unlabeled")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parts on `side`'s side of the edge (other, side).
    pub fn side_parts(&self, other: usize, side: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        seen[side] = true;
        let mut stack = vec![side];
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            if let Some(p) = self.labels[v] {
                out.push(p);
            }
            for &w in &self.adj[v] {
                if !(v == side && w == other) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Max width and per-edge widths against the arrangement. Cut values
    /// are intrinsic to the labeled parts, so the tree may cover a subset
    /// of the arrangement.
    pub fn width(&self, a: &Arrangement) -> Result<(usize, EdgeWidths), BdError> {
        for p in self.parts() {
            if p >= a.n() {
                return Err(BdError::LabelMismatch(format!(
                    "part {p} outside arrangement"
                )));
            }
        }
        let mut per_edge = Vec::new();
        let mut max = 0;
        for (u, v) in self.edges() {
            let left = self.side_parts(v, u);
            let right = self.side_parts(u, v);
            let w = a
                .span_of_parts(&left)
                .intersect(&a.span_of_parts(&right))
                .expect("same ambient")
                .dim();
            max = max.max(w);
            per_edge.push(((u, v), w));
        }
        Ok((max, per_edge))
    }

    /// Rooted variant: subdivide the lexicographically first edge.
    pub fn rooted(&self) -> DecTree {
        if self.n() == 1 {
            let mut t = self.clone();
            t.root = Some(0);
            return t;
        }
        let (u, v) = self.edges()[0];
        let mut t = self.clone();
        let r = t.adj.len();
        t.adj.push(vec![u, v]);
        t.labels.push(None);
        t.adj[u].retain(|&w| w != v);
        t.adj[v].retain(|&w| w != u);
        t.adj[u].push(r);
        t.adj[v].push(r);
        t.root = Some(r);
        t
    }

    pub fn with_root(mut self, r: usize) -> DecTree {
        assert!(r < self.n() && self.degree(r) <= 2);
        self.root = Some(r);
        self
    }

    /// Remove a degree-2 root, joining its neighbors.
    pub fn smooth_root(&self) -> DecTree {
        let Some(r) = self.root else {
            return self.clone();
        };
        if self.degree(r) != 2 {
            let mut t = self.clone();
            t.root = None;
            return t;
        }
        let (a, b) = (self.adj[r][0], self.adj[r][1]);
        let mut edges = Vec::new();
        for (u, v) in self.edges() {
            if u != r && v != r {
                edges.push((u, v));
            }
        }
        edges.push((a.min(b), a.max(b)));
        let mut labels = self.labels.clone();
        labels.remove(r);
        let remap = |x: usize| if x > r { x - 1 } else { x };
        let edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (remap(u), remap(v))).collect();
        DecTree::from_edges(&edges, labels)
    }

    /// Parents and a postorder for a rooted tree.
    pub fn orient(&self) -> Result<(Vec<Option<usize>>, Vec<usize>), BdError> {
        let Some(r) = self.root else {
            return Err(BdError::Unrooted);
        };
        let mut parent = vec![None; self.n()];
        let mut order = Vec::with_capacity(self.n());
        let mut stack = vec![(r, usize::MAX, false)];
        while let Some((v, p, expanded)) = stack.pop() {
            if expanded {
                order.push(v);
                continue;
            }
            stack.push((v, p, true));
            for &w in self.adj[v].iter().rev() {
                if p == usize::MAX || w != p {
                    parent[w] = Some(v);
                    stack.push((w, v, false));
                }
            }
        }
        Ok((parent, order))
    }

    /// Post-order traversal: 1-based part index at leaves, `*` at internal
    /// nodes.
    pub fn postorder_string(&self) -> Result<String, BdError> {
        let Some(r) = self.root else {
            return Err(BdError::Unrooted);
        };
        fn rec(t: &DecTree, v: usize, p: usize, out: &mut Vec<String>) {
            let mut internal = false;
            for &w in &t.adj[v] {
                if w != p {
                    internal = true;
                    rec(t, w, v, out);
                }
            }
            if internal {
                out.push("*".into());
            } else {
                out.push(format!("{}", t.labels[v].expect("labeled leaf") + 1));
            }
        }
        let mut out = Vec::new();
        rec(self, r, usize::MAX, &mut out);
        Ok(out.join(" "))
    }

    /// The restriction to a part subset: minimal subtree on those leaves
    /// with degree-2 nodes smoothed, plus the canonical injection of the
    /// new nodes into the old ones.
    pub fn induced(&self, subset: &[usize]) -> Result<(DecTree, Vec<usize>), BdError> {
        if subset.is_empty() {
            return Err(BdError::EmptySubset);
        }
        let want: BTreeSet<usize> = subset.iter().copied().collect();
        let terminals: Vec<usize> = (0..self.n())
            .filter(|&v| self.labels[v].is_some_and(|p| want.contains(&p)))
            .collect();
        assert_eq!(terminals.len(), want.len(), "missing parts in tree");
        if terminals.len() == 1 {
            let old = terminals[0];
            return Ok((DecTree::single(self.labels[old].unwrap()), vec![old]));
        }
        let mut alive = vec![true; self.n()];
        let mut deg: Vec<usize> = (0..self.n()).map(|v| self.degree(v)).collect();
        let is_terminal = |v: usize| terminals.contains(&v);
        let mut queue: Vec<usize> = (0..self.n())
            .filter(|&v| deg[v] <= 1 && !is_terminal(v))
            .collect();
        while let Some(v) = queue.pop() {
            if !alive[v] || is_terminal(v) || deg[v] > 1 {
                continue;
            }
            alive[v] = false;
            for &w in &self.adj[v] {
                if alive[w] {
                    deg[w] -= 1;
                    if deg[w] <= 1 && !is_terminal(w) {
                        queue.push(w);
                    }
                }
            }
        }
        let keep: Vec<usize> = (0..self.n())
            .filter(|&v| alive[v] && (deg[v] != 2 || is_terminal(v)))
            .collect();
        let mut new_id = vec![usize::MAX; self.n()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let mut edges = Vec::new();
        for &s in &keep {
            for &w0 in &self.adj[s] {
                if !alive[w0] {
                    continue;
                }
                let (mut prev, mut cur) = (s, w0);
                while new_id[cur] == usize::MAX {
                    let next = *self.adj[cur]
                        .iter()
                        .find(|&&x| x != prev && alive[x])
                        .expect("degree-2 chain continues");
                    prev = cur;
                    cur = next;
                }
                if new_id[s] < new_id[cur] {
                    edges.push((new_id[s], new_id[cur]));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let labels: Vec<Option<usize>> = keep.iter().map(|&v| self.labels[v]).collect();
        Ok((DecTree::from_edges(&edges, labels), keep))
    }

    /// Attach a new leaf for `part` by subdividing the first edge (or by
    /// joining directly when the tree is a single node).
    pub fn add_leaf(&self, part: usize) -> DecTree {
        let mut t = self.clone();
        if t.n() == 1 {
            let l = t.adj.len();
            t.adj.push(vec![0]);
            t.adj[0].push(l);
            t.labels.push(Some(part));
            return t;
        }
        let (u, v) = t.edges()[0];
        let mid = t.adj.len();
        let leaf = mid + 1;
        t.adj.push(vec![u, v, leaf]);
        t.adj.push(vec![mid]);
        t.labels.push(None);
        t.labels.push(Some(part));
        t.adj[u].retain(|&w| w != v);
        t.adj[v].retain(|&w| w != u);
        t.adj[u].push(mid);
        t.adj[v].push(mid);
        t
    }

    /// The canonical B-namu: alpha is B meet the side spans, lambda the
    /// full cut dimension, U is B meet the span of all covered parts.
    pub fn canonical_namu(&self, a: &Arrangement, b: &Subspace) -> Result<BNamu, BdError> {
        if b.ambient() != a.rows() {
            return Err(BdError::AmbientMismatch);
        }
        let tree = Tree::new(self.n(), &self.edges());
        let mut alpha = Vec::new();
        let mut lambda = Vec::new();
        for &(u, v) in tree.edges() {
            let su = a.span_of_parts(&self.side_parts(v, u));
            let sv = a.span_of_parts(&self.side_parts(u, v));
            alpha.push([
                b.intersect(&su).expect("ambient"),
                b.intersect(&sv).expect("ambient"),
            ]);
            lambda.push(su.intersect(&sv).expect("ambient").dim() as u32);
        }
        let u_all = b
            .intersect(&a.span_of_parts(&self.parts()))
            .expect("ambient");
        Ok(BNamu::new(tree, alpha, lambda, u_all).expect("canonical namu is valid"))
    }
}

/// Per-node data of a rooted base decomposition: the parts below each node
/// and the boundary subspace there.
pub struct BaseCtx<'a> {
    pub base: &'a DecTree,
    pub arr: &'a Arrangement,
    vx: Vec<Vec<usize>>,
    bx: Vec<Subspace>,
    children: Vec<Vec<usize>>,
    postorder: Vec<usize>,
}

impl<'a> BaseCtx<'a> {
    pub fn new(base: &'a DecTree, arr: &'a Arrangement) -> Result<BaseCtx<'a>, BdError> {
        let (parent, postorder) = base.orient()?;
        let mut children = vec![Vec::new(); base.n()];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(v);
            }
        }
        let mut vx = vec![Vec::new(); base.n()];
        for &v in &postorder {
            if let Some(p) = base.label(v) {
                vx[v] = vec![p];
            } else {
                let mut acc = Vec::new();
                for &c in &children[v] {
                    acc.extend_from_slice(&vx[c]);
                }
                acc.sort_unstable();
                vx[v] = acc;
            }
        }
        let bx = (0..base.n()).map(|v| arr.boundary(&vx[v])).collect();
        Ok(BaseCtx {
            base,
            arr,
            vx,
            bx,
            children,
            postorder,
        })
    }

    #[inline]
    pub fn parts_below(&self, x: usize) -> &[usize] {
        &self.vx[x]
    }

    #[inline]
    pub fn boundary(&self, x: usize) -> &Subspace {
        &self.bx[x]
    }

    #[inline]
    pub fn children(&self, x: usize) -> &[usize] {
        &self.children[x]
    }

    #[inline]
    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    /// Base nodes y <= x (x and its descendants), sorted.
    pub fn below(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(v) = stack.pop() {
            out.push(v);
            for &c in &self.children[v] {
                stack.push(c);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Everything the purity machinery derives about one decomposition at one
/// base node.
#[derive(Debug, Clone)]
pub struct PredicateReport {
    pub x: usize,
    pub degenerate_edges: Vec<(usize, usize)>,
    /// (edge, guarded end).
    pub guarding: Vec<((usize, usize), usize)>,
    pub improper_guarding: Vec<((usize, usize), usize)>,
    /// (u, center, w) triples.
    pub blocking_paths: Vec<(usize, usize, usize)>,
    pub improper_blocking: Vec<(usize, usize, usize)>,
    /// The recursive decomposition-level verdict.
    pub decomposition_degenerate: bool,
    pub improper_degenerate_edges: Vec<(usize, usize)>,
    pub disjoint: bool,
    pub pure: bool,
    /// Directed protected pairs (u, v); v is the deleted head.
    pub protected: Vec<(usize, usize)>,
}

/// Predicate engine for one decomposition `t` of a part subset against a
/// base context. Degeneracy is resolved bottom-up over the base once, at
/// construction.
pub struct Predicates<'a> {
    pub t: &'a DecTree,
    pub ctx: &'a BaseCtx<'a>,
    parts: Vec<usize>,
    degenerate: Vec<Option<bool>>,
}

impl<'a> Predicates<'a> {
    pub fn new(t: &'a DecTree, ctx: &'a BaseCtx<'a>) -> Predicates<'a> {
        let parts = t.parts();
        let mut p = Predicates {
            t,
            ctx,
            parts,
            degenerate: vec![None; ctx.base.n()],
        };
        for i in 0..ctx.postorder().len() {
            let x = ctx.postorder()[i];
            if p.in_scope(x) {
                let d = p.compute_degenerate(x);
                p.degenerate[x] = Some(d);
            }
        }
        p
    }

    pub fn in_scope(&self, x: usize) -> bool {
        self.ctx
            .parts_below(x)
            .iter()
            .all(|p| self.parts.binary_search(p).is_ok())
    }

    fn span_x_side(&self, x: usize, other: usize, side: usize) -> Subspace {
        let vx = self.ctx.parts_below(x);
        let side_parts: Vec<usize> = self
            .t
            .side_parts(other, side)
            .into_iter()
            .filter(|p| vx.binary_search(p).is_ok())
            .collect();
        self.ctx.arr.span_of_parts(&side_parts)
    }

    fn alpha_x(&self, x: usize, other: usize, side: usize) -> Subspace {
        self.span_x_side(x, other, side)
            .intersect(self.ctx.boundary(x))
            .expect("ambient")
    }

    fn count_x(&self, x: usize, other: usize, side: usize) -> usize {
        let vx = self.ctx.parts_below(x);
        self.t
            .side_parts(other, side)
            .iter()
            .filter(|p| vx.binary_search(p).is_ok())
            .count()
    }

    fn count_rest(&self, x: usize, other: usize, side: usize) -> usize {
        let vx = self.ctx.parts_below(x);
        self.t
            .side_parts(other, side)
            .iter()
            .filter(|p| vx.binary_search(p).is_err())
            .count()
    }

    /// (u,v) is x-mixed: v's side holds a V_x part and a non-V_x part.
    pub fn mixed(&self, x: usize, u: usize, v: usize) -> bool {
        self.count_x(x, u, v) > 0 && self.count_rest(x, u, v) > 0
    }

    /// Edge uv cuts V_x: both sides hold a V_x part.
    pub fn cuts(&self, x: usize, u: usize, v: usize) -> bool {
        self.count_x(x, u, v) > 0 && self.count_x(x, v, u) > 0
    }

    pub fn edge_degenerate(&self, x: usize, u: usize, v: usize) -> bool {
        self.alpha_x(x, u, v) == self.alpha_x(x, v, u)
    }

    /// uv x-guards the end v (the V_x shadow on v's side is strictly
    /// smaller).
    pub fn edge_guards(&self, x: usize, u: usize, v: usize) -> bool {
        let av = self.alpha_x(x, u, v);
        let au = self.alpha_x(x, v, u);
        av != au && au.contains(&av).expect("ambient")
    }

    fn edge_degenerate_or_guarding(&self, x: usize, u: usize, v: usize) -> bool {
        self.edge_degenerate(x, u, v) || self.edge_guards(x, u, v) || self.edge_guards(x, v, u)
    }

    pub fn blocking_paths(&self, x: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.t.n() {
            let nb = self.t.neighbors(c);
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    let (u, w) = (nb[i], nb[j]);
                    if self.alpha_x(x, u, c) == self.alpha_x(x, c, w)
                        && self.alpha_x(x, w, c) == self.alpha_x(x, c, u)
                        && !self.edge_degenerate_or_guarding(x, u, c)
                        && !self.edge_degenerate_or_guarding(x, c, w)
                    {
                        out.push((u, c, w));
                    }
                }
            }
        }
        out
    }

    pub fn improper_blocking(&self, x: usize, u: usize, c: usize, w: usize) -> bool {
        self.t.neighbors(c).iter().any(|&tn| {
            tn != u
                && tn != w
                && self.mixed(x, c, tn)
                && self.count_x(x, c, u) > 0
                && self.count_x(x, c, w) > 0
                && self.count_x(x, c, tn) > 0
        })
    }

    pub fn improper_guarding(&self, x: usize, u: usize, v: usize) -> bool {
        let nb: Vec<usize> = self
            .t
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| w != u)
            .collect();
        nb.len() == 2
            && self.count_x(x, v, nb[0]) > 0
            && self.count_x(x, v, nb[1]) > 0
            && self.mixed(x, u, v)
    }

    fn compute_degenerate(&self, x: usize) -> bool {
        self.improper_degenerate_edges(x).next().is_some()
    }

    /// Edges witnessing x-degeneracy of the whole decomposition:
    /// x-degenerate, cutting V_x, and not cutting V_y for any y < x at
    /// which the decomposition is y-degenerate.
    pub fn improper_degenerate_edges(&self, x: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let descendants: Vec<usize> = self.ctx.below(x).into_iter().filter(|&y| y != x).collect();
        self.t.edges().into_iter().filter(move |&(u, v)| {
            self.edge_degenerate(x, u, v)
                && self.cuts(x, u, v)
                && descendants
                    .iter()
                    .all(|&y| !(self.degenerate[y] == Some(true) && self.cuts(y, u, v)))
        })
    }

    pub fn is_degenerate(&self, x: usize) -> bool {
        self.degenerate[x] == Some(true)
    }

    pub fn is_disjoint(&self, x: usize) -> bool {
        if self.ctx.parts_below(x) == self.parts.as_slice() {
            return true;
        }
        let improper: Vec<(usize, usize)> = self.improper_degenerate_edges(x).collect();
        for (u, v) in self.t.edges() {
            for (a, b) in [(u, v), (v, u)] {
                let side = self.t.side_parts(a, b);
                if side == self.ctx.parts_below(x)
                    && improper.iter().any(|&(p, q)| p == b || q == b)
                {
                    return true;
                }
            }
        }
        false
    }

    pub fn is_pure(&self, x: usize) -> bool {
        if self.is_degenerate(x) {
            return self.is_disjoint(x);
        }
        for (u, v) in self.t.edges() {
            for (a, b) in [(u, v), (v, u)] {
                if self.edge_guards(x, a, b) && self.improper_guarding(x, a, b) {
                    return false;
                }
            }
        }
        self.blocking_paths(x)
            .into_iter()
            .all(|(u, c, w)| !self.improper_blocking(x, u, c, w))
    }

    pub fn totally_pure(&self) -> bool {
        (0..self.ctx.base.n()).all(|x| !self.in_scope(x) || self.is_pure(x))
    }

    /// Nodes x-blocked by some guarding edge (with the two-nonempty-branch
    /// proviso) or blocking path.
    pub fn blocked_nodes(&self, x: usize) -> Vec<usize> {
        let mut blocked = vec![false; self.t.n()];
        for (u, v) in self.t.edges() {
            for (a, b) in [(u, v), (v, u)] {
                if !self.edge_guards(x, a, b) {
                    continue;
                }
                let nb: Vec<usize> = self
                    .t
                    .neighbors(b)
                    .iter()
                    .copied()
                    .filter(|&w| w != a)
                    .collect();
                if nb.len() == 2 && self.count_x(x, b, nb[0]) > 0 && self.count_x(x, b, nb[1]) > 0 {
                    for w in self.component_nodes(a, b) {
                        if w != b {
                            blocked[w] = true;
                        }
                    }
                }
            }
        }
        for (u, c, w) in self.blocking_paths(x) {
            let mut seen = vec![false; self.t.n()];
            seen[c] = true;
            let mut stack = vec![c];
            while let Some(a) = stack.pop() {
                for &b in self.t.neighbors(a) {
                    if b != u && b != w && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            for v in 0..self.t.n() {
                if seen[v] && v != c {
                    blocked[v] = true;
                }
            }
        }
        (0..self.t.n()).filter(|&v| blocked[v]).collect()
    }

    fn component_nodes(&self, other: usize, side: usize) -> Vec<usize> {
        let mut seen = vec![false; self.t.n()];
        seen[side] = true;
        let mut stack = vec![side];
        let mut out = vec![side];
        while let Some(v) = stack.pop() {
            for &w in self.t.neighbors(v) {
                if !(v == side && w == other) && !seen[w] {
                    seen[w] = true;
                    out.push(w);
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Directed pairs (u, v) that are x-protected.
    pub fn protected_pairs(&self, x: usize) -> Vec<(usize, usize)> {
        let blocked = self.blocked_nodes(x);
        let below = self.ctx.below(x);
        let mut out = Vec::new();
        for (u, v) in self.t.edges() {
            for (a, b) in [(u, v), (v, u)] {
                let edge_blocked = blocked.contains(&a) || blocked.contains(&b);
                if edge_blocked && self.edge_guards(x, a, b) {
                    out.push((a, b));
                    continue;
                }
                let side = self.t.side_parts(a, b);
                for &z in &below {
                    if self.degenerate[z] == Some(true)
                        && self.cuts(z, a, b)
                        && side
                            .iter()
                            .all(|p| self.ctx.parts_below(z).binary_search(p).is_ok())
                    {
                        out.push((a, b));
                        break;
                    }
                }
            }
        }
        out
    }

    /// k-safety with respect to x: every edge outside the surviving core
    /// obeys lambda(uv) + dim B_x - dim(B_x cap span(core-side)) <= k, in
    /// the orientation pointing away from the core. The core is the
    /// reduced-namu node set, or the midpoint of an improper x-degenerate
    /// edge when the whole decomposition is x-degenerate (then both
    /// directions of that edge are checked). This is the orientation the
    /// replay machinery consumes; quantifying over every protected pair
    /// regardless of direction over-rejects degenerate decompositions.
    pub fn k_safe_wrt(&self, x: usize, k: usize) -> bool {
        if self.t.n() == 1 {
            return true;
        }
        if self.is_degenerate(x) {
            let witnesses: Vec<(usize, usize)> = self.improper_degenerate_edges(x).collect();
            witnesses
                .into_iter()
                .any(|(a, b)| self.k_safe_from_seed(x, k, &[a, b], Some((a, b))))
        } else {
            let heads: BTreeSet<usize> = self
                .protected_pairs(x)
                .into_iter()
                .map(|(_, v)| v)
                .collect();
            let core: Vec<usize> = (0..self.t.n()).filter(|v| !heads.contains(v)).collect();
            assert!(!core.is_empty(), "protected heads cover the whole tree");
            self.k_safe_from_seed(x, k, &core, None)
        }
    }

    /// Check the away-from-core inequality on every edge leaving or outside
    /// the seed set; `seed_edge` additionally demands both directions of
    /// that edge (the core is its midpoint).
    fn k_safe_from_seed(
        &self,
        x: usize,
        k: usize,
        seed: &[usize],
        seed_edge: Option<(usize, usize)>,
    ) -> bool {
        // distance to the seed, to orient every edge away from it
        let mut dist = vec![usize::MAX; self.t.n()];
        let mut queue = std::collections::VecDeque::new();
        for &s in seed {
            dist[s] = 0;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for &w in self.t.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        let check = |tail: usize, head: usize| -> bool {
            let bx = self.ctx.boundary(x);
            let span_head = self.full_span(tail, head);
            let span_tail = self.full_span(head, tail);
            let lam = span_head.intersect(&span_tail).expect("ambient").dim();
            let keep = bx.intersect(&span_tail).expect("ambient").dim();
            lam + bx.dim() <= k + keep
        };
        for (u, v) in self.t.edges() {
            if let Some((a, b)) = seed_edge {
                if (u, v) == (a.min(b), a.max(b)) {
                    if !check(u, v) || !check(v, u) {
                        return false;
                    }
                    continue;
                }
            }
            if dist[u] == 0 && dist[v] == 0 {
                continue; // inside the core
            }
            let (tail, head) = if dist[u] <= dist[v] { (u, v) } else { (v, u) };
            if !check(tail, head) {
                return false;
            }
        }
        true
    }

    fn full_span(&self, other: usize, side: usize) -> Subspace {
        self.ctx.arr.span_of_parts(&self.t.side_parts(other, side))
    }

    /// The reduced B_x-namu of a decomposition of exactly V_x: the
    /// canonical namu restricted to the unprotected nodes, or a single node
    /// when the decomposition is x-degenerate.
    pub fn reduced_namu(&self, x: usize) -> Result<BNamu, BdError> {
        if self.parts != self.ctx.parts_below(x) {
            return Err(BdError::ScopeMismatch(format!(
                "reduced namu needs a decomposition of exactly the parts below {x}"
            )));
        }
        let bx = self.ctx.boundary(x);
        let full = self.t.canonical_namu(self.ctx.arr, bx)?;
        if self.is_degenerate(x) {
            return Ok(BNamu::single(full.universe().clone()));
        }
        let heads: BTreeSet<usize> = self
            .protected_pairs(x)
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        if heads.is_empty() {
            return Ok(full);
        }
        let kept: Vec<usize> = (0..self.t.n()).filter(|v| !heads.contains(v)).collect();
        assert!(!kept.is_empty(), "protected nodes cover the whole tree");
        let (g, _) = full.induced_on(&kept);
        Ok(g)
    }

    pub fn report(&self, x: usize) -> Result<PredicateReport, BdError> {
        if !self.in_scope(x) {
            return Err(BdError::ScopeMismatch(format!(
                "V_{x} not within the decomposition"
            )));
        }
        let mut degenerate_edges = Vec::new();
        let mut guarding = Vec::new();
        let mut improper_guarding = Vec::new();
        for (u, v) in self.t.edges() {
            if self.edge_degenerate(x, u, v) {
                degenerate_edges.push((u, v));
            }
            for (a, b) in [(u, v), (v, u)] {
                if self.edge_guards(x, a, b) {
                    guarding.push(((a, b), b));
                    if self.improper_guarding(x, a, b) {
                        improper_guarding.push(((a, b), b));
                    }
                }
            }
        }
        let blocking_paths = self.blocking_paths(x);
        let improper_blocking: Vec<(usize, usize, usize)> = blocking_paths
            .iter()
            .copied()
            .filter(|&(u, c, w)| self.improper_blocking(x, u, c, w))
            .collect();
        Ok(PredicateReport {
            x,
            degenerate_edges,
            guarding,
            improper_guarding,
            blocking_paths,
            improper_blocking,
            decomposition_degenerate: self.is_degenerate(x),
            improper_degenerate_edges: self.improper_degenerate_edges(x).collect(),
            disjoint: self.is_disjoint(x),
            pure: self.is_pure(x),
            protected: self.protected_pairs(x),
        })
    }

    /// lambda_x of an edge: the intersection dimension of the V_x shadows.
    pub fn lambda_x(&self, x: usize, u: usize, v: usize) -> usize {
        self.span_x_side(x, u, v)
            .intersect(&self.span_x_side(x, v, u))
            .expect("ambient")
            .dim()
    }
}

/// A regrouped subtree: edges over original node ids after smoothing, the
/// surviving node set and the reattachment root.
struct Piece {
    edges: Vec<(usize, usize)>,
    nodes: Vec<usize>,
    root: usize,
}

fn steiner_piece(
    t: &DecTree,
    region: &[usize],
    anchor_dist: &[usize],
    terminals: &[usize],
) -> Piece {
    assert!(!terminals.is_empty());
    if terminals.len() == 1 {
        return Piece {
            edges: Vec::new(),
            nodes: vec![terminals[0]],
            root: terminals[0],
        };
    }
    let in_region = |v: usize| region.contains(&v);
    let mut alive: Vec<bool> = (0..t.n()).map(in_region).collect();
    let mut deg = vec![0usize; t.n()];
    for v in 0..t.n() {
        if alive[v] {
            deg[v] = t.neighbors(v).iter().filter(|&&w| alive[w]).count();
        }
    }
    let mut queue: Vec<usize> = (0..t.n())
        .filter(|&v| alive[v] && deg[v] <= 1 && !terminals.contains(&v))
        .collect();
    while let Some(v) = queue.pop() {
        if !alive[v] || terminals.contains(&v) || deg[v] > 1 {
            continue;
        }
        alive[v] = false;
        for &w in t.neighbors(v) {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] <= 1 && !terminals.contains(&w) {
                    queue.push(w);
                }
            }
        }
    }
    let root = (0..t.n())
        .filter(|&v| alive[v])
        .min_by_key(|&v| anchor_dist[v])
        .expect("piece nonempty");
    let keep: Vec<usize> = (0..t.n())
        .filter(|&v| alive[v] && (v == root || deg[v] != 2))
        .collect();
    let mut edges = Vec::new();
    for &s in &keep {
        for &w0 in t.neighbors(s) {
            if !alive[w0] {
                continue;
            }
            let (mut prev, mut cur) = (s, w0);
            while !keep.contains(&cur) {
                let next = *t
                    .neighbors(cur)
                    .iter()
                    .find(|&&x| x != prev && alive[x])
                    .expect("chain continues");
                prev = cur;
                cur = next;
            }
            edges.push((s.min(cur), s.max(cur)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Piece {
        edges,
        nodes: keep,
        root,
    }
}

fn distances_from(t: &DecTree, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; t.n()];
    d[s] = 0;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &w in t.neighbors(v) {
            if d[w] == usize::MAX {
                d[w] = d[v] + 1;
                queue.push_back(w);
            }
        }
    }
    d
}

/// Assemble a decomposition from edges keyed by arbitrary node ids;
/// renumbers densely in sorted-id order.
fn assemble(edges: &[(usize, usize)], labels: &[(usize, usize)]) -> DecTree {
    let mut ids: BTreeSet<usize> = BTreeSet::new();
    for &(u, v) in edges {
        ids.insert(u);
        ids.insert(v);
    }
    for &(v, _) in labels {
        ids.insert(v);
    }
    let ids: Vec<usize> = ids.into_iter().collect();
    let idx = |v: usize| ids.binary_search(&v).unwrap();
    let mut lab = vec![None; ids.len()];
    for &(v, p) in labels {
        lab[idx(v)] = Some(p);
    }
    let e: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (idx(u), idx(v))).collect();
    DecTree::from_edges(&e, lab)
}

/// Forking at `v` by V_x: needs an improper x-blocking path v1-v-v2 with
/// lambda_x(v v1) >= lambda_x(v v2). Deletes the nodes blocked by the path,
/// subdivides v-v2, and reattaches the third branch regrouped into its V_x
/// and complement subtrees. Width never increases.
pub fn fork(t: &DecTree, preds: &Predicates<'_>, v: usize, x: usize) -> Result<DecTree, BdError> {
    if t.degree(v) != 3 {
        return Err(BdError::PreconditionViolated(format!(
            "node {v} has no three neighbors"
        )));
    }
    let mut found = None;
    for (a, c, b) in preds.blocking_paths(x) {
        if c == v && preds.improper_blocking(x, a, c, b) {
            let (v1, v2) = if preds.lambda_x(x, v, a) >= preds.lambda_x(x, v, b) {
                (a, b)
            } else {
                (b, a)
            };
            found = Some((v1, v2));
            break;
        }
    }
    let Some((v1, v2)) = found else {
        return Err(BdError::PreconditionViolated(format!(
            "no improper x-blocking path centered at {v}"
        )));
    };
    let v3 = *t
        .neighbors(v)
        .iter()
        .find(|&&w| w != v1 && w != v2)
        .expect("third neighbor");
    rebuild_regrouped(t, preds, x, v, v2, v3, true)
}

/// Splitting at (u, v) by V_x: needs (u, v) x-mixed and the edge either
/// improperly x-guarding v or improper x-degenerate. Replaces everything
/// beyond v by the regrouped V_x / complement subtrees.
pub fn split(
    t: &DecTree,
    preds: &Predicates<'_>,
    u: usize,
    v: usize,
    x: usize,
) -> Result<DecTree, BdError> {
    if !preds.mixed(x, u, v) {
        return Err(BdError::PreconditionViolated("(u,v) is not x-mixed".into()));
    }
    let guard_ok = preds.edge_guards(x, u, v) && preds.improper_guarding(x, u, v);
    let degen_ok = preds
        .improper_degenerate_edges(x)
        .any(|(a, b)| (a, b) == (u.min(v), u.max(v)));
    if !guard_ok && !degen_ok {
        return Err(BdError::PreconditionViolated(
            "edge neither improperly x-guards v nor is improper x-degenerate".into(),
        ));
    }
    if t.degree(v) != 3 {
        return Err(BdError::PreconditionViolated(
            "split end needs two other branches".into(),
        ));
    }
    rebuild_regrouped(t, preds, x, v, u, usize::MAX, false)
}

/// Shared tail of fork and split: carve out a region, regroup its leaves
/// into the V_x piece and the complement piece, and reattach.
fn rebuild_regrouped(
    t: &DecTree,
    preds: &Predicates<'_>,
    x: usize,
    v: usize,
    keep2_or_u: usize,
    third: usize,
    forking: bool,
) -> Result<DecTree, BdError> {
    let vx = preds.ctx.parts_below(x);
    let (region, anchor, deleted): (Vec<usize>, usize, Vec<usize>) = if forking {
        // region: component of T - (v, v3) containing v3; all of it goes
        let mut seen = vec![false; t.n()];
        seen[third] = true;
        let mut stack = vec![third];
        while let Some(a) = stack.pop() {
            for &b in t.neighbors(a) {
                if !(a == third && b == v) && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        let region: Vec<usize> = (0..t.n()).filter(|&a| seen[a]).collect();
        (region.clone(), third, region)
    } else {
        // region: component of T - (u, v) containing v (v included in the
        // pieces but kept in the main tree)
        let u = keep2_or_u;
        let mut seen = vec![false; t.n()];
        seen[v] = true;
        let mut stack = vec![v];
        while let Some(a) = stack.pop() {
            for &b in t.neighbors(a) {
                if !(a == v && b == u) && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        let region: Vec<usize> = (0..t.n()).filter(|&a| seen[a]).collect();
        let deleted = region.iter().copied().filter(|&a| a != v).collect();
        (region, v, deleted)
    };
    let dist = distances_from(t, anchor);
    let term_x: Vec<usize> = region
        .iter()
        .copied()
        .filter(|&a| t.label(a).is_some_and(|p| vx.binary_search(&p).is_ok()))
        .collect();
    let term_rest: Vec<usize> = region
        .iter()
        .copied()
        .filter(|&a| t.label(a).is_some_and(|p| vx.binary_search(&p).is_err()))
        .collect();
    if term_x.is_empty() || term_rest.is_empty() {
        return Err(BdError::PreconditionViolated(
            "regrouped region must hold both sides".into(),
        ));
    }
    let piece_x = steiner_piece(t, &region, &dist, &term_x);
    let piece_rest = steiner_piece(t, &region, &dist, &term_rest);

    // pieces enter as disjoint copies on fresh ids
    let mut next = t.n() + 2;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut labels: Vec<(usize, usize)> = Vec::new();
    let place = |piece: &Piece,
                 next: &mut usize,
                 edges: &mut Vec<(usize, usize)>,
                 labels: &mut Vec<(usize, usize)>|
     -> usize {
        let mut map = std::collections::BTreeMap::new();
        for &n in &piece.nodes {
            map.insert(n, *next);
            *next += 1;
        }
        for &(a, b) in &piece.edges {
            edges.push((map[&a], map[&b]));
        }
        for &n in &piece.nodes {
            if let Some(p) = t.label(n) {
                labels.push((map[&n], p));
            }
        }
        map[&piece.root]
    };

    let kept: Vec<usize> = (0..t.n()).filter(|a| !deleted.contains(a)).collect();
    for (a, b) in t.edges() {
        if kept.contains(&a) && kept.contains(&b) {
            edges.push((a, b));
        }
    }
    for &a in &kept {
        if let Some(p) = t.label(a) {
            labels.push((a, p));
        }
    }
    let root_x = place(&piece_x, &mut next, &mut edges, &mut labels);
    let root_rest = place(&piece_rest, &mut next, &mut edges, &mut labels);
    if forking {
        let v2 = keep2_or_u;
        let vprime = t.n();
        edges.retain(|&(a, b)| (a, b) != (v.min(v2), v.max(v2)));
        edges.push((v, vprime));
        edges.push((vprime, v2));
        edges.push((v, root_x));
        edges.push((vprime, root_rest));
    } else {
        edges.push((v, root_x));
        edges.push((v, root_rest));
    }
    let out = assemble(&edges, &labels);
    out.check()?;
    Ok(out)
}

#[cfg(test)]
mod tests;
