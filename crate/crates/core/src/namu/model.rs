//! Subdivision models: embeddings of one subcubic tree into another as a
//! subtree isomorphic to a subdivision, pair models (the gluing data of a
//! namu sum), and the induced incidence map.

use super::{BNamu, Tree};

/// A T-model in a host tree: `edge_map[e]` names the pattern edge whose
/// subdivision path contains host edge `e` (None = outside the model), and
/// `branch[v]` is the host node representing pattern node `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeModel {
    pub edge_map: Vec<Option<usize>>,
    pub branch: Vec<usize>,
}

/// A (T1,T2)-model: two models into a common host.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairModel {
    pub host: Tree,
    pub m1: TreeModel,
    pub m2: TreeModel,
}

/// Value of the induced incidence map at a host incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncRef {
    Covered { node: usize, edge: usize },
    Star,
    Zero,
}

/// The induced map on incidences: for an edge on the subdivision path of
/// pattern edge `f`, the end of `f` whose branch image lies on `v`'s side;
/// otherwise Star or Zero by whether `v`'s side meets the model at all.
pub fn vec_eta(host: &Tree, pattern: &Tree, m: &TreeModel, v: usize, e: usize) -> IncRef {
    let side = host.component_without_edge(e, v);
    if let Some(f) = m.edge_map[e] {
        let (p, q) = pattern.edges()[f];
        let node = if side.contains(&m.branch[p]) { p } else { q };
        debug_assert!(side.contains(&m.branch[node]));
        IncRef::Covered { node, edge: f }
    } else if m.branch.iter().any(|b| side.contains(b)) {
        IncRef::Star
    } else {
        IncRef::Zero
    }
}

/// Definitional validity of a single model: for every pattern edge the
/// covered host edges are exactly the path between the branch images of its
/// ends, and path interiors avoid branch images.
pub fn is_model(host: &Tree, m: &TreeModel, pattern: &Tree) -> bool {
    if m.branch.len() != pattern.n() || m.edge_map.len() != host.edges().len() {
        return false;
    }
    let mut seen = vec![false; host.n()];
    for &b in &m.branch {
        if b >= host.n() || seen[b] {
            return false;
        }
        seen[b] = true;
    }
    for x in m.edge_map.iter().flatten() {
        if *x >= pattern.edges().len() {
            return false;
        }
    }
    for (f, &(p, q)) in pattern.edges().iter().enumerate() {
        let path = host.path(m.branch[p], m.branch[q]);
        if path.len() < 2 {
            return false;
        }
        let mut count = 0;
        for w in path.windows(2) {
            match host.edge_between(w[0], w[1]) {
                Some(e) if m.edge_map[e] == Some(f) => count += 1,
                _ => return false,
            }
        }
        if m.edge_map.iter().filter(|&&x| x == Some(f)).count() != count {
            return false;
        }
        for &w in &path[1..path.len() - 1] {
            if m.branch.contains(&w) {
                return false;
            }
        }
    }
    true
}

/// Definitional check of the pair-model conditions (i)-(iii).
pub fn is_pair_model(pm: &PairModel, t1: &Tree, t2: &Tree) -> bool {
    let host = &pm.host;
    if !is_model(host, &pm.m1, t1) || !is_model(host, &pm.m2, t2) {
        return false;
    }
    let models = [&pm.m1, &pm.m2];
    // (i): where a model edge meets a non-model edge, the shared node is a
    // subdividing node of that model (inside it, but not a branch image)
    for m in models {
        for v in 0..host.n() {
            let covered = host
                .adj(v)
                .iter()
                .filter(|&&(_, e)| m.edge_map[e].is_some())
                .count();
            let uncovered = host.adj(v).len() - covered;
            if covered > 0 && uncovered > 0 && m.branch.contains(&v) {
                return false;
            }
        }
    }
    // (ii): host leaves are exactly the disjoint union of leaf images
    let mut leaf_images = Vec::new();
    for (m, t) in [(&pm.m1, t1), (&pm.m2, t2)] {
        for l in t.leaves() {
            leaf_images.push(m.branch[l]);
        }
    }
    let mut hl = host.leaves();
    hl.sort_unstable();
    leaf_images.sort_unstable();
    if hl != leaf_images {
        return false;
    }
    // (iii): degree <= 2 host nodes are branch images of exactly one model
    for v in 0..host.n() {
        if host.degree(v) <= 2 {
            let c = models.iter().filter(|m| m.branch.contains(&v)).count();
            if c != 1 {
                return false;
            }
        }
    }
    true
}

/// All embeddings of `base` into `g` as a decorated subdivision subtree:
/// host edges on the path of pattern edge `pe` must carry the pattern's
/// exact lambda and both alpha values, oriented along the walk.
pub fn find_extension_models(base: &BNamu, g: &BNamu) -> Vec<TreeModel> {
    let host = g.tree();
    let pat = base.tree();
    if pat.n() == 1 {
        return (0..host.n())
            .map(|c| TreeModel {
                edge_map: vec![None; host.edges().len()],
                branch: vec![c],
            })
            .collect();
    }
    let b0 = *pat.leaves().first().expect("pattern has a leaf");
    let mut s = Search {
        base,
        g,
        edge_map: vec![None; host.edges().len()],
        branch: vec![usize::MAX; pat.n()],
        out: Vec::new(),
    };
    for h0 in 0..host.n() {
        s.branch[b0] = h0;
        let mut agenda: Vec<(usize, usize, usize)> =
            pat.adj(b0).iter().map(|&(pn, pe)| (b0, pn, pe)).collect();
        s.step(&mut agenda);
        s.branch[b0] = usize::MAX;
    }
    s.out
}

struct Search<'a> {
    base: &'a BNamu,
    g: &'a BNamu,
    edge_map: Vec<Option<usize>>,
    branch: Vec<usize>,
    out: Vec<TreeModel>,
}

impl Search<'_> {
    fn step(&mut self, agenda: &mut Vec<(usize, usize, usize)>) {
        let Some((pfrom, pto, pe)) = agenda.pop() else {
            debug_assert!(self.branch.iter().all(|&b| b != usize::MAX));
            let m = TreeModel {
                edge_map: self.edge_map.clone(),
                branch: self.branch.clone(),
            };
            if !self.out.contains(&m) {
                self.out.push(m);
            }
            return;
        };
        let h = self.branch[pfrom];
        self.walk(pfrom, pto, pe, h, agenda);
        agenda.push((pfrom, pto, pe));
    }

    /// Extend the subdivision path of `pe` from host node `hcur`.
    fn walk(
        &mut self,
        pfrom: usize,
        pto: usize,
        pe: usize,
        hcur: usize,
        agenda: &mut Vec<(usize, usize, usize)>,
    ) {
        let nexts: Vec<(usize, usize)> = self.g.tree().adj(hcur).to_vec();
        for (hn, he) in nexts {
            if self.edge_map[he].is_some() {
                continue;
            }
            // a node already inside the model cannot be re-entered
            if self.branch.contains(&hn)
                || self
                    .g
                    .tree()
                    .adj(hn)
                    .iter()
                    .any(|&(_, e2)| e2 != he && self.edge_map[e2].is_some())
            {
                continue;
            }
            if self.g.lambda_at(he) != self.base.lambda_at(pe)
                || self.g.alpha_at(hcur, he) != self.base.alpha_at(pfrom, pe)
                || self.g.alpha_at(hn, he) != self.base.alpha_at(pto, pe)
            {
                continue;
            }
            self.edge_map[he] = Some(pe);
            // arrive at pto
            {
                self.branch[pto] = hn;
                let before = agenda.len();
                for &(pn2, pe2) in self.base.tree().adj(pto) {
                    if pe2 != pe {
                        agenda.push((pto, pn2, pe2));
                    }
                }
                self.step(agenda);
                agenda.truncate(before);
                self.branch[pto] = usize::MAX;
            }
            // or keep subdividing
            self.walk(pfrom, pto, pe, hn, agenda);
            self.edge_map[he] = None;
        }
    }
}
