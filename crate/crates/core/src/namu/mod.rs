//! Decorated subcubic trees ("namus") — the dynamic-programming state.
//!
//! A B-namu is a subcubic tree whose incidences carry subspaces of a
//! boundary space B, whose edges carry integer widths, together with a
//! universe U. It abstracts the shadow that a partial branch-decomposition
//! casts on B. This module implements the calculus on namus: typical
//! sequences, trimming, compression to a compact normal form, projection,
//! sums over pair models, the domination order, and k-safe extension
//! checking.

mod compare;
mod model;
mod sum;

pub use compare::{tle, TleCert};
pub use model::{is_pair_model, vec_eta, IncRef, PairModel, TreeModel};
pub use sum::{enumerate_pair_models, enumerate_sums, sum_by_model};

use crate::linalg::Subspace;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NamuError {
    AmbientMismatch {
        left: usize,
        right: usize,
    },
    NotSubspace,
    /// `base` passed to the k-safe check is not the trim of the namu.
    NotTrimOf,
    /// A sum enumeration would exceed the configured node cap.
    ResourceExceeded {
        needed: usize,
        cap: usize,
    },
    Invalid(String),
}

impl fmt::Display for NamuError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamuError::AmbientMismatch { left, right } => {
                write!(f, "namu ambient dimensions differ: {left} vs {right}")
            }
            NamuError::NotSubspace => write!(f, "projection target is not a subspace of B"),
            NamuError::NotTrimOf => write!(f, "base namu is not the trim of the extension"),
            NamuError::ResourceExceeded { needed, cap } => {
                write!(f, "sum host would need {needed} nodes, over the cap {cap}")
            }
            NamuError::Invalid(s) => write!(f, "invalid namu: {s}"),
        }
    }
}

impl std::error::Error for NamuError {}

/// Unlabeled tree on nodes `0..n` with indexed edges. Namus and sum hosts
/// are built on this; it allows degree-2 nodes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>, // (neighbor, edge id)
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree(n={}, edges={:?})", self.n, self.edges)
    }
}

impl Tree {
    pub fn new(n: usize, edge_list: &[(usize, usize)]) -> Tree {
        assert!(n >= 1);
        assert_eq!(edge_list.len() + 1, n, "not a tree");
        let mut edges: Vec<(usize, usize)> = edge_list
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            assert!(u < v && v < n, "bad edge ({u},{v})");
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
        let t = Tree { n, edges, adj };
        assert!(t.adj.iter().all(|a| a.len() <= 3), "tree is not subcubic");
        debug_assert!(t.connected());
        t
    }

    pub fn single() -> Tree {
        Tree::new(1, &[])
    }

    fn connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn adj(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.degree(v) <= 1).collect()
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if v == a {
            b
        } else {
            debug_assert_eq!(v, b);
            a
        }
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    /// Nodes of the component of `tree - edge e` containing `side`.
    pub fn component_without_edge(&self, e: usize, side: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![side];
        seen[side] = true;
        while let Some(v) = stack.pop() {
            for &(w, f) in &self.adj[v] {
                if f != e && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..self.n).filter(|&v| seen[v]).collect()
    }

    /// Node path from `u` to `v` inclusive.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.n];
        let mut stack = vec![u];
        prev[u] = u;
        while let Some(x) = stack.pop() {
            if x == v {
                break;
            }
            for &(w, _) in &self.adj[x] {
                if prev[w] == usize::MAX {
                    prev[w] = x;
                    stack.push(w);
                }
            }
        }
        let mut path = vec![v];
        let mut at = v;
        while at != u {
            at = prev[at];
            path.push(at);
        }
        path.reverse();
        path
    }

    /// Diameter in edges.
    pub fn diameter(&self) -> usize {
        let far = |s: usize| -> (usize, usize) {
            let mut dist = vec![usize::MAX; self.n];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            let mut best = (s, 0);
            while let Some(v) = queue.pop_front() {
                if dist[v] > best.1 {
                    best = (v, dist[v]);
                }
                for &(w, _) in &self.adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            best
        };
        let (a, _) = far(0);
        let (_, d) = far(a);
        d
    }
}

/// A B-namu. Subspaces are coordinates with respect to a fixed ordered
/// basis of B, so `ambient` equals dim B. `alpha[e]` holds the incidence
/// decorations at the two ends of edge `e`, lower node id first.
#[derive(Clone, PartialEq, Eq)]
pub struct BNamu {
    tree: Tree,
    alpha: Vec<[Subspace; 2]>,
    lambda: Vec<u32>,
    universe: Subspace,
}

impl fmt::Debug for BNamu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl BNamu {
    pub fn new(
        tree: Tree,
        alpha: Vec<[Subspace; 2]>,
        lambda: Vec<u32>,
        universe: Subspace,
    ) -> Result<BNamu, NamuError> {
        let g = BNamu {
            tree,
            alpha,
            lambda,
            universe,
        };
        g.validate()?;
        Ok(g)
    }

    /// Single-node namu with the given universe.
    pub fn single(universe: Subspace) -> BNamu {
        BNamu {
            tree: Tree::single(),
            alpha: Vec::new(),
            lambda: Vec::new(),
            universe,
        }
    }

    pub fn validate(&self) -> Result<(), NamuError> {
        let t = &self.tree;
        if self.alpha.len() != t.edges().len() || self.lambda.len() != t.edges().len() {
            return Err(NamuError::Invalid("decoration arity mismatch".into()));
        }
        let amb = self.universe.ambient();
        for (e, pair) in self.alpha.iter().enumerate() {
            for s in pair {
                if s.ambient() != amb {
                    return Err(NamuError::Invalid("alpha ambient mismatch".into()));
                }
                if !self.universe.contains(s).expect("same ambient") {
                    return Err(NamuError::Invalid(format!(
                        "alpha at edge {e} not within U"
                    )));
                }
            }
        }
        // (i): along any two-edge path v0,e1,v1,e2,v2: alpha(v0,e1) <= alpha(v1,e2)
        for v1 in 0..t.n() {
            for &(v0, e1) in t.adj(v1) {
                for &(v2, e2) in t.adj(v1) {
                    if e1 == e2 {
                        continue;
                    }
                    let a01 = self.alpha_at(v0, e1);
                    let a12 = self.alpha_at(v1, e2);
                    if !a12.contains(a01).expect("same ambient") {
                        return Err(NamuError::Invalid(format!(
                            "condition (i) fails on path {v0}-{v1}-{v2}"
                        )));
                    }
                }
            }
        }
        // (iv): lambda(e) >= dim alpha(u,e) cap alpha(v,e)
        for (e, &(u, v)) in t.edges().iter().enumerate() {
            let meet = self
                .alpha_at(u, e)
                .intersect(self.alpha_at(v, e))
                .expect("same ambient");
            if (self.lambda[e] as usize) < meet.dim() {
                return Err(NamuError::Invalid(format!(
                    "condition (iv) fails at edge {e}={u}-{v}"
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    #[inline]
    pub fn universe(&self) -> &Subspace {
        &self.universe
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.universe.ambient()
    }

    /// alpha(v, e) where v must be an end of edge e.
    pub fn alpha_at(&self, v: usize, e: usize) -> &Subspace {
        let (a, b) = self.tree.edges()[e];
        if v == a {
            &self.alpha[e][0]
        } else {
            debug_assert_eq!(v, b);
            &self.alpha[e][1]
        }
    }

    #[inline]
    pub fn lambda_at(&self, e: usize) -> u32 {
        self.lambda[e]
    }

    pub fn width(&self) -> u32 {
        self.lambda.iter().copied().max().unwrap_or(0)
    }

    pub fn is_single_node(&self) -> bool {
        self.tree.n() == 1
    }

    /// Edge uv with alpha(u,e) == alpha(v,e).
    pub fn degenerate_edges(&self) -> Vec<usize> {
        (0..self.tree.edges().len())
            .filter(|&e| self.alpha[e][0] == self.alpha[e][1])
            .collect()
    }

    /// Whether edge `e` guards the end `v`: alpha(v,e) strictly below alpha(u,e).
    pub fn guards(&self, e: usize, v: usize) -> bool {
        let u = self.tree.other_end(e, v);
        let av = self.alpha_at(v, e);
        let au = self.alpha_at(u, e);
        au.contains(av).expect("same ambient") && av != au
    }

    /// Blocking paths (x, y, z) through a degree-2-or-3 center y.
    pub fn blocking_paths(&self) -> Vec<(usize, usize, usize)> {
        let t = &self.tree;
        let mut out = Vec::new();
        for y in 0..t.n() {
            let nb = t.adj(y);
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    let (x, ex) = nb[i];
                    let (z, ez) = nb[j];
                    // alpha(x,xy) == alpha(y,yz) and alpha(z,zy) == alpha(y,yx)
                    if self.alpha_at(x, ex) == self.alpha_at(y, ez)
                        && self.alpha_at(z, ez) == self.alpha_at(y, ex)
                        && !self.edge_degenerate_or_guarding(ex)
                        && !self.edge_degenerate_or_guarding(ez)
                    {
                        out.push((x, y, z));
                    }
                }
            }
        }
        out
    }

    fn edge_degenerate_or_guarding(&self, e: usize) -> bool {
        let (u, v) = self.tree.edges()[e];
        self.alpha[e][0] == self.alpha[e][1] || self.guards(e, u) || self.guards(e, v)
    }

    /// Nodes blocked by some guarding edge or blocking path.
    pub fn blocked_nodes(&self) -> Vec<usize> {
        let t = &self.tree;
        let mut blocked = vec![false; t.n()];
        for (e, &(u, v)) in t.edges().iter().enumerate() {
            for (guarded, _other) in [(v, u), (u, v)] {
                if self.guards(e, guarded) {
                    for w in t.component_without_edge(e, guarded) {
                        if w != guarded {
                            blocked[w] = true;
                        }
                    }
                }
            }
        }
        for (x, y, z) in self.blocking_paths() {
            // nodes with a path to y avoiding both x and z
            let mut seen = vec![false; t.n()];
            seen[y] = true;
            let mut stack = vec![y];
            while let Some(a) = stack.pop() {
                for &(b, _) in t.adj(a) {
                    if b != x && b != z && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            for w in 0..t.n() {
                if seen[w] && w != y {
                    blocked[w] = true;
                }
            }
        }
        (0..t.n()).filter(|&v| blocked[v]).collect()
    }

    /// Trim: a single-node namu if any edge is degenerate, otherwise the
    /// namu induced on the unblocked nodes. Width is preserved.
    pub fn trim(&self) -> BNamu {
        self.trim_with_info().0
    }

    pub fn trim_with_info(&self) -> (BNamu, TrimInfo) {
        let degen = self.degenerate_edges();
        if let Some(&e) = degen.first() {
            return (
                BNamu::single(self.universe.clone()),
                TrimInfo::Degenerate {
                    edge: self.tree.edges()[e],
                },
            );
        }
        let blocked = self.blocked_nodes();
        if blocked.is_empty() {
            let kept = (0..self.tree.n()).collect();
            return (self.clone(), TrimInfo::Blocked { kept });
        }
        let mut keep = vec![true; self.tree.n()];
        for &b in &blocked {
            keep[b] = false;
        }
        let kept: Vec<usize> = (0..self.tree.n()).filter(|&v| keep[v]).collect();
        assert!(!kept.is_empty(), "trim removed every node");
        let (g, _) = self.induced_on(&kept);
        (g, TrimInfo::Blocked { kept })
    }

    /// Namu induced on a connected node subset; also returns old edge ids
    /// in the order of the new edge indexing.
    pub fn induced_on(&self, kept: &[usize]) -> (BNamu, Vec<usize>) {
        let t = &self.tree;
        let mut new_id = vec![usize::MAX; t.n()];
        for (i, &v) in kept.iter().enumerate() {
            new_id[v] = i;
        }
        let mut new_edges = Vec::new();
        let mut old_eids = Vec::new();
        for (e, &(u, v)) in t.edges().iter().enumerate() {
            if new_id[u] != usize::MAX && new_id[v] != usize::MAX {
                new_edges.push((new_id[u], new_id[v]));
                old_eids.push(e);
            }
        }
        assert_eq!(
            new_edges.len() + 1,
            kept.len(),
            "induced node set is not connected"
        );
        let tree = Tree::new(kept.len(), &new_edges);
        // Tree::new sorts edges; realign decoration order
        let mut alpha = Vec::with_capacity(old_eids.len());
        let mut lambda = Vec::with_capacity(old_eids.len());
        let mut old_by_new = Vec::with_capacity(old_eids.len());
        for &(nu, nv) in tree.edges() {
            let (ou, ov) = (kept[nu], kept[nv]);
            let old_e = t.edge_between(ou, ov).expect("edge exists");
            alpha.push([
                self.alpha_at(ou, old_e).clone(),
                self.alpha_at(ov, old_e).clone(),
            ]);
            lambda.push(self.lambda[old_e]);
            old_by_new.push(old_e);
        }
        (
            BNamu {
                tree,
                alpha,
                lambda,
                universe: self.universe.clone(),
            },
            old_by_new,
        )
    }

    /// All currently applicable compressions, in a canonical order.
    pub fn compress_candidates(&self) -> Vec<Compression> {
        let t = &self.tree;
        let mut out = Vec::new();
        // two-edge rule: contract e1 of a path v0,e1,v1,e2,v2 with deg(v1)=2
        for v1 in 0..t.n() {
            if t.degree(v1) != 2 {
                continue;
            }
            let (v0, e1) = t.adj(v1)[0];
            let (v2, e2) = t.adj(v1)[1];
            if self.alpha_at(v0, e1) == self.alpha_at(v1, e2)
                && self.alpha_at(v1, e1) == self.alpha_at(v2, e2)
                && self.lambda[e1] == self.lambda[e2]
            {
                out.push(Compression::Pair { center: v1 });
            }
        }
        // long rule: path v0..vn, interior degree 2, shifted alphas equal,
        // lambda(e1) <= interior <= lambda(en)
        for v0 in 0..t.n() {
            for &(first, e_first) in t.adj(v0) {
                let mut nodes = vec![v0, first];
                let mut edges = vec![e_first];
                loop {
                    let last = *nodes.last().unwrap();
                    let nlen = nodes.len();
                    if edges.len() >= 3 {
                        let ok_alpha = (1..nlen - 1).all(|i| {
                            self.alpha_at(nodes[i - 1], edges[i - 1])
                                == self.alpha_at(nodes[i], edges[i])
                                && self.alpha_at(nodes[i], edges[i - 1])
                                    == self.alpha_at(nodes[i + 1], edges[i])
                        });
                        let l1 = self.lambda[edges[0]];
                        let ln = self.lambda[*edges.last().unwrap()];
                        let ok_lambda = edges[1..edges.len() - 1]
                            .iter()
                            .all(|&e| l1 <= self.lambda[e] && self.lambda[e] <= ln);
                        if ok_alpha && ok_lambda {
                            out.push(Compression::Run {
                                nodes: nodes.clone(),
                            });
                        }
                    }
                    if t.degree(last) != 2 {
                        break;
                    }
                    let prev = nodes[nlen - 2];
                    let &(next, e_next) = t.adj(last).iter().find(|&&(w, _)| w != prev).unwrap();
                    nodes.push(next);
                    edges.push(e_next);
                }
            }
        }
        out.sort_by_key(|a| a.sort_key());
        out.dedup();
        out
    }

    /// Apply one compression.
    pub fn apply_compression(&self, c: &Compression) -> BNamu {
        let t = &self.tree;
        match c {
            Compression::Pair { center } => {
                let (v0, e1) = t.adj(*center)[0];
                let (v2, e2) = t.adj(*center)[1];
                let keep: Vec<usize> = (0..t.n()).filter(|&v| v != *center).collect();
                self.rebuild_replacing(
                    &keep,
                    (v0, v2),
                    [self.alpha_at(v0, e1).clone(), self.alpha_at(v2, e2).clone()],
                    self.lambda[e1],
                )
            }
            Compression::Run { nodes } => {
                let n = nodes.len();
                let e1 = t.edge_between(nodes[0], nodes[1]).unwrap();
                let en = t.edge_between(nodes[n - 2], nodes[n - 1]).unwrap();
                // interior nodes v1..v_{n-2} merge into one
                let interior: Vec<usize> = nodes[1..n - 1].to_vec();
                let mid = interior[0];
                let keep: Vec<usize> = (0..t.n())
                    .filter(|&v| v == mid || !interior.contains(&v))
                    .collect();
                self.rebuild_run(&keep, nodes, mid, e1, en)
            }
        }
    }

    fn rebuild_replacing(
        &self,
        keep: &[usize],
        new_edge: (usize, usize),
        new_alpha: [Subspace; 2],
        new_lambda: u32,
    ) -> BNamu {
        let t = &self.tree;
        let mut new_id = vec![usize::MAX; t.n()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let mut edges = Vec::new();
        let mut deco: Vec<([Subspace; 2], u32)> = Vec::new();
        for (e, &(u, v)) in t.edges().iter().enumerate() {
            if new_id[u] != usize::MAX && new_id[v] != usize::MAX {
                edges.push((new_id[u], new_id[v]));
                deco.push((
                    [self.alpha[e][0].clone(), self.alpha[e][1].clone()],
                    self.lambda[e],
                ));
            }
        }
        let (a, b) = (new_id[new_edge.0], new_id[new_edge.1]);
        edges.push((a, b));
        let osort = if a < b {
            new_alpha
        } else {
            [new_alpha[1].clone(), new_alpha[0].clone()]
        };
        deco.push((osort, new_lambda));
        let tree = Tree::new(keep.len(), &edges);
        let mut alpha = Vec::with_capacity(deco.len());
        let mut lambda = Vec::with_capacity(deco.len());
        for &(nu, nv) in tree.edges() {
            let idx = edges
                .iter()
                .position(|&(x, y)| (x.min(y), x.max(y)) == (nu, nv))
                .expect("edge present");
            let (mut pair, l) = deco[idx].clone();
            let (x, y) = edges[idx];
            if x > y {
                pair.swap(0, 1);
            }
            alpha.push(pair);
            lambda.push(l);
        }
        BNamu {
            tree,
            alpha,
            lambda,
            universe: self.universe.clone(),
        }
    }

    fn rebuild_run(
        &self,
        keep: &[usize],
        path: &[usize],
        mid: usize,
        e1: usize,
        en: usize,
    ) -> BNamu {
        let t = &self.tree;
        let n = path.len();
        let (v0, vn) = (path[0], path[n - 1]);
        let mut new_id = vec![usize::MAX; t.n()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i;
        }
        let path_edge = |a: usize, b: usize| t.edge_between(a, b).unwrap();
        let interior_edges: Vec<usize> = (0..n - 1)
            .map(|i| path_edge(path[i], path[i + 1]))
            .collect();
        let mut edges = Vec::new();
        let mut deco: Vec<([Subspace; 2], u32)> = Vec::new();
        for (e, &(u, v)) in t.edges().iter().enumerate() {
            if interior_edges.contains(&e) {
                continue;
            }
            if new_id[u] != usize::MAX && new_id[v] != usize::MAX {
                edges.push((new_id[u], new_id[v]));
                deco.push((
                    [self.alpha[e][0].clone(), self.alpha[e][1].clone()],
                    self.lambda[e],
                ));
            }
        }
        // surviving first edge: (v0, mid), decorations of e1
        edges.push((new_id[v0], new_id[mid]));
        deco.push((
            [
                self.alpha_at(v0, e1).clone(),
                self.alpha_at(path[1], e1).clone(),
            ],
            self.lambda[e1],
        ));
        // surviving last edge: (mid, vn), decorations of en
        edges.push((new_id[mid], new_id[vn]));
        deco.push((
            [
                self.alpha_at(path[n - 2], en).clone(),
                self.alpha_at(vn, en).clone(),
            ],
            self.lambda[en],
        ));
        let tree = Tree::new(keep.len(), &edges);
        let mut alpha = Vec::with_capacity(deco.len());
        let mut lambda = Vec::with_capacity(deco.len());
        for &(nu, nv) in tree.edges() {
            let idx = edges
                .iter()
                .position(|&(x, y)| (x.min(y), x.max(y)) == (nu, nv))
                .expect("edge present");
            let (mut pair, l) = deco[idx].clone();
            let (x, y) = edges[idx];
            if x > y {
                pair.swap(0, 1);
            }
            alpha.push(pair);
            lambda.push(l);
        }
        BNamu {
            tree,
            alpha,
            lambda,
            universe: self.universe.clone(),
        }
    }

    /// Compactification: trim, then compress to the fixpoint.
    pub fn compactify(&self) -> BNamu {
        let mut g = self.trim();
        loop {
            let cands = g.compress_candidates();
            let Some(c) = cands.first() else {
                return g;
            };
            g = g.apply_compression(c);
        }
    }

    pub fn is_compact(&self) -> bool {
        self.canonical_key() == self.compactify().canonical_key()
    }

    /// Projection onto a subspace of B: decorations meet `b2`, widths kept.
    pub fn project(&self, b2: &Subspace) -> Result<BNamu, NamuError> {
        if b2.ambient() != self.ambient() {
            return Err(NamuError::NotSubspace);
        }
        let alpha = self
            .alpha
            .iter()
            .map(|pair| {
                [
                    pair[0].intersect(b2).expect("same ambient"),
                    pair[1].intersect(b2).expect("same ambient"),
                ]
            })
            .collect();
        Ok(BNamu {
            tree: self.tree.clone(),
            alpha,
            lambda: self.lambda.clone(),
            universe: self.universe.intersect(b2).expect("same ambient"),
        })
    }

    /// Rewrite every subspace through `f` (used to change coordinates).
    pub fn map_subspaces<F: Fn(&Subspace) -> Subspace>(&self, f: F) -> BNamu {
        let alpha = self.alpha.iter().map(|p| [f(&p[0]), f(&p[1])]).collect();
        BNamu {
            tree: self.tree.clone(),
            alpha,
            lambda: self.lambda.clone(),
            universe: f(&self.universe),
        }
    }

    /// Complete isomorphism-invariant encoding: equal keys iff isomorphic
    /// as decorated trees with equal universes.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut best: Option<Vec<u8>> = None;
        for c in self.centers() {
            let mut enc = Vec::new();
            push_subspace(&mut enc, &self.universe);
            self.encode_rooted(c, usize::MAX, &mut enc);
            if best.as_ref().is_none_or(|b| enc < *b) {
                best = Some(enc);
            }
        }
        best.unwrap()
    }

    fn centers(&self) -> Vec<usize> {
        let t = &self.tree;
        if t.n() == 1 {
            return vec![0];
        }
        // peel leaves until <= 2 nodes remain
        let mut deg: Vec<usize> = (0..t.n()).map(|v| t.degree(v)).collect();
        let mut alive = vec![true; t.n()];
        let mut frontier: Vec<usize> = (0..t.n()).filter(|&v| deg[v] <= 1).collect();
        let mut remaining = t.n();
        while remaining > 2 {
            let mut next = Vec::new();
            for &v in &frontier {
                alive[v] = false;
                remaining -= 1;
                for &(w, _) in t.adj(v) {
                    if alive[w] {
                        deg[w] -= 1;
                        if deg[w] == 1 {
                            next.push(w);
                        }
                    }
                }
            }
            frontier = next;
        }
        (0..t.n()).filter(|&v| alive[v]).collect()
    }

    fn encode_rooted(&self, v: usize, parent_edge: usize, out: &mut Vec<u8>) {
        let mut blocks: Vec<Vec<u8>> = Vec::new();
        for &(c, e) in self.tree.adj(v) {
            if e == parent_edge {
                continue;
            }
            let mut b = Vec::new();
            b.push(b'(');
            b.extend_from_slice(&self.lambda[e].to_be_bytes());
            push_subspace(&mut b, self.alpha_at(v, e));
            push_subspace(&mut b, self.alpha_at(c, e));
            self.encode_rooted(c, e, &mut b);
            b.push(b')');
            blocks.push(b);
        }
        blocks.sort();
        for b in blocks {
            out.extend_from_slice(&b);
        }
    }

    pub fn isomorphic(&self, other: &BNamu) -> bool {
        self.canonical_key() == other.canonical_key()
    }

    /// Textual rendering with alpha/lambda annotations, for debugging and
    /// test goldens.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = write!(
            s,
            "namu n={} dimB={} dimU={} width={}",
            self.tree.n(),
            self.ambient(),
            self.universe.dim(),
            self.width()
        );
        for (e, &(u, v)) in self.tree.edges().iter().enumerate() {
            let _ = write!(
                s,
                "\n  {u}-{v} lambda={} dim_a({u})={} dim_a({v})={}",
                self.lambda[e],
                self.alpha[e][0].dim(),
                self.alpha[e][1].dim()
            );
        }
        s
    }
}

fn push_subspace(out: &mut Vec<u8>, s: &Subspace) {
    out.push(b'[');
    out.extend_from_slice(&(s.ambient() as u32).to_be_bytes());
    out.extend_from_slice(&(s.dim() as u32).to_be_bytes());
    for r in 0..s.basis().rows() {
        for c in 0..s.basis().cols() {
            out.extend_from_slice(&s.basis()[(r, c)].to_be_bytes());
        }
    }
    out.push(b']');
}

/// How a trim was produced; consumed by the evidence replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrimInfo {
    /// Some edge was degenerate; the trim is a single node.
    Degenerate { edge: (usize, usize) },
    /// Blocked nodes removed; `kept[i]` is the pre-trim id of new node i.
    Blocked { kept: Vec<usize> },
}

/// One applicable compression step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compression {
    /// Contract one edge of a two-edge path with equal lambdas.
    Pair { center: usize },
    /// Collapse the interior of a sandwiched run (three or more edges).
    Run { nodes: Vec<usize> },
}

impl Compression {
    fn sort_key(&self) -> (usize, Vec<usize>) {
        match self {
            Compression::Pair { center } => (0, vec![*center]),
            Compression::Run { nodes } => (1, nodes.clone()),
        }
    }
}

/// The typical sequence: the fixpoint of deleting dominated interior runs
/// and equal adjacent repeats.
pub fn typical(s: &[i64]) -> Vec<i64> {
    let mut v: Vec<i64> = s.to_vec();
    loop {
        let mut changed = false;
        // rule (ii): remove a_k when a_k == a_{k+1}
        let mut i = 0;
        while i + 1 < v.len() {
            if v[i] == v[i + 1] {
                v.remove(i);
                changed = true;
            } else {
                i += 1;
            }
        }
        // rule (i): delete a_{i+1}..a_{j-1} when every a_k with i <= k <= j
        // lies between a_i and a_j
        'outer: for i in 0..v.len() {
            for j in (i + 2)..v.len() {
                let lo = v[i].min(v[j]);
                let hi = v[i].max(v[j]);
                if (i..=j).all(|k| lo <= v[k] && v[k] <= hi) {
                    v.drain(i + 1..j);
                    changed = true;
                    break 'outer;
                }
            }
        }
        if !changed {
            return v;
        }
    }
}

/// k-safe extension test: is `g` a k-safe extension of `base`, where `base`
/// must be the trim of `g`? Existential over all embeddings of `base` into
/// `g` that match decorations exactly; each edge left uncovered by the
/// embedding must satisfy lambda + dim U - dim alpha(model side) <= k.
pub fn ksafe_extension_check(g: &BNamu, base: &BNamu, k: u32) -> Result<bool, NamuError> {
    if base.canonical_key() != g.trim().canonical_key() {
        return Err(NamuError::NotTrimOf);
    }
    if base.universe() != g.universe() {
        return Ok(false);
    }
    let models = model::find_extension_models(base, g);
    let dim_u = g.universe().dim() as i64;
    'models: for m in &models {
        for e in 0..g.tree().edges().len() {
            if m.edge_map[e].is_some() {
                continue;
            }
            // side of e containing the model
            let (u, v) = g.tree().edges()[e];
            let u_side = g.tree().component_without_edge(e, u);
            let side = if m.branch.iter().any(|&b| u_side.contains(&b)) {
                u
            } else {
                v
            };
            let lhs = g.lambda_at(e) as i64 + dim_u - g.alpha_at(side, e).dim() as i64;
            if lhs > k as i64 {
                continue 'models;
            }
        }
        return Ok(true);
    }
    Ok(false)
}
