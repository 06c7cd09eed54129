//! The table-building dynamic program over a composition tree, evidence
//! recording, backtracking a width-<= k decomposition out of the tables,
//! and the iterative-compression driver around it.
//!
//! Tables hold compact namus. The literal up-closure over every compact
//! namu of the boundary is astronomically large even for k = 1, so the
//! compare stage instead stores the compactification of each surviving
//! trim — an equivalent representative under the domination order — and
//! prunes the table to an antichain. Evidence for the compare stage is the
//! alignment certificate between the trim and its compactification, so the
//! replay of the printing algorithm is unchanged.

use crate::arrangement::{Arrangement, Preprocessed};
use crate::bdtree::DecTree;
use crate::linalg::{Mat, Subspace};
use crate::namu::{
    enumerate_sums, ksafe_extension_check, tle, BNamu, NamuError, PairModel, TleCert, TrimInfo,
};
use crate::transcript::{boundary_bases, build_transcript, Transcript, TranscriptError};
use std::fmt;

pub const DEFAULT_NODE_CAP: usize = 64;

#[derive(Debug)]
pub enum SolveError {
    /// A sum enumeration would exceed the namu node cap; reported with the
    /// base node where it happened.
    ResourceExceeded {
        base_node: usize,
        needed: usize,
        cap: usize,
    },
    /// Internal consistency failure; indicates a bug, never an input fault.
    EvidenceCorrupt(String),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::ResourceExceeded {
                base_node,
                needed,
                cap,
            } => write!(
                f,
                "namu node cap exceeded at base node {base_node}: need {needed}, cap {cap}"
            ),
            SolveError::EvidenceCorrupt(s) => write!(f, "evidence corrupt: {s}"),
        }
    }
}

impl std::error::Error for SolveError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompKind {
    Leaf,
    Join,
    Shrink,
    Trim,
    Compare,
}

/// The base decomposition refined into leaf/join/shrink/trim/compare
/// stages: every non-leaf-incident edge subdivided twice.
pub struct CompTree {
    pub kind: Vec<CompKind>,
    pub base: Vec<usize>,
    pub children: Vec<Vec<usize>>,
    pub root: usize,
    pub order: Vec<usize>,
    /// comp node of each base node's finished table (compare or leaf).
    pub of_base: Vec<usize>,
}

impl CompTree {
    pub fn new(base: &DecTree) -> Result<CompTree, SolveError> {
        let (parent, postorder) = base
            .orient()
            .map_err(|e| SolveError::EvidenceCorrupt(format!("base not rooted: {e}")))?;
        let mut base_children = vec![Vec::new(); base.n()];
        for (v, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                base_children[*p].push(v);
            }
        }
        let mut kind = Vec::new();
        let mut bnode = Vec::new();
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut of_base = vec![usize::MAX; base.n()];
        let mut order = Vec::new();
        for &v in &postorder {
            if base_children[v].is_empty() {
                kind.push(CompKind::Leaf);
                bnode.push(v);
                children.push(Vec::new());
                of_base[v] = kind.len() - 1;
                order.push(kind.len() - 1);
            } else {
                let cs: Vec<usize> = base_children[v].iter().map(|&c| of_base[c]).collect();
                for (i, k) in [
                    CompKind::Join,
                    CompKind::Shrink,
                    CompKind::Trim,
                    CompKind::Compare,
                ]
                .into_iter()
                .enumerate()
                {
                    kind.push(k);
                    bnode.push(v);
                    children.push(if i == 0 {
                        cs.clone()
                    } else {
                        vec![kind.len() - 2]
                    });
                    order.push(kind.len() - 1);
                }
                of_base[v] = kind.len() - 1;
            }
        }
        let root = of_base[base.root().expect("rooted")];
        Ok(CompTree {
            kind,
            base: bnode,
            children,
            root,
            order,
            of_base,
        })
    }
}

/// Why a namu sits in its table; enough to replay the construction.
pub enum Evidence {
    Leaf { part: usize },
    Join { i1: usize, i2: usize, pm: PairModel },
    Shrink { pre: usize },
    Trim { pre: usize, info: TrimInfo },
    Compare { pre: usize, cert: TleCert },
}

pub struct Entry {
    pub namu: BNamu,
    pub ev: Evidence,
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub comp: usize,
    pub kind: CompKind,
    pub base_node: usize,
    pub table_len: usize,
    pub max_namu_nodes: usize,
}

pub struct FullSetTable {
    pub comp: CompTree,
    pub tables: Vec<Vec<Entry>>,
    pub trace: Vec<TraceRow>,
}

impl FullSetTable {
    pub fn root_entries(&self) -> &[Entry] {
        &self.tables[self.comp.root]
    }
}

fn drop_coords(s: &Subspace, b: usize) -> Subspace {
    let m = s.basis();
    for r in b..m.rows() {
        for c in 0..m.cols() {
            assert_eq!(
                m[(r, c)],
                0,
                "projection left coordinates outside the boundary"
            );
        }
    }
    let rows: Vec<usize> = (0..b).collect();
    let cols: Vec<usize> = (0..m.cols()).collect();
    Subspace::from_cols(&m.submatrix(&rows, &cols))
}

fn lift(g: &BNamu, t: &Mat) -> BNamu {
    g.map_subspaces(|s| Subspace::from_cols(&t.mul(s.basis()).expect("shape")))
}

/// Run the table construction bottom-up over the composition tree of the
/// rooted base decomposition. The root table is nonempty exactly when the
/// covered arrangement has branch-width at most k.
pub fn run_fullset_dp(
    a: &Arrangement,
    k: usize,
    base: &DecTree,
    tr: &Transcript,
    node_cap: usize,
) -> Result<FullSetTable, SolveError> {
    if base.parts().iter().any(|&p| p >= a.n()) || tr.basis.len() != base.n() {
        return Err(SolveError::EvidenceCorrupt(
            "base decomposition, arrangement and transcript disagree".into(),
        ));
    }
    let comp = CompTree::new(base)?;
    let mut tables: Vec<Vec<Entry>> = (0..comp.kind.len()).map(|_| Vec::new()).collect();
    let mut trace = Vec::new();
    for &c in &comp.order {
        let v = comp.base[c];
        let mut table: Vec<Entry> = Vec::new();
        match comp.kind[c] {
            CompKind::Leaf => {
                let theta = tr.basis[v].cols();
                let part = base.label(v).expect("base leaf labeled");
                let u = Subspace::full(theta, tr.basis[v].spec());
                table.push(Entry {
                    namu: BNamu::single(u),
                    ev: Evidence::Leaf { part },
                });
            }
            CompKind::Join => {
                let cs = &comp.children[c];
                let (c1, c2) = (cs[0], cs[1]);
                let (w1, w2) = (comp.base[c1], comp.base[c2]);
                let t1 = tr.trans[w1].as_ref().expect("child transition");
                let t2 = tr.trans[w2].as_ref().expect("child transition");
                let mut seen: Vec<Vec<u8>> = Vec::new();
                for (i1, e1) in tables[c1].iter().enumerate() {
                    let g1 = lift(&e1.namu, t1);
                    for (i2, e2) in tables[c2].iter().enumerate() {
                        let g2 = lift(&e2.namu, t2);
                        let sums = enumerate_sums(&g1, &g2, node_cap).map_err(|e| match e {
                            NamuError::ResourceExceeded { needed, cap } => {
                                SolveError::ResourceExceeded {
                                    base_node: v,
                                    needed,
                                    cap,
                                }
                            }
                            other => SolveError::EvidenceCorrupt(other.to_string()),
                        })?;
                        for (s, pm) in sums {
                            if s.width() as usize > k {
                                continue;
                            }
                            let key = s.canonical_key();
                            if !seen.contains(&key) {
                                seen.push(key);
                                table.push(Entry {
                                    namu: s,
                                    ev: Evidence::Join { i1, i2, pm },
                                });
                            }
                        }
                    }
                }
            }
            CompKind::Shrink => {
                let pre_table = &tables[comp.children[c][0]];
                let b = tr.basis[v].cols();
                let bprime = tr.basis_prime[v].cols();
                let spec = tr.basis[v].spec();
                let coord_sub = {
                    let mut m = Mat::zero(bprime, b, spec);
                    for i in 0..b {
                        m[(i, i)] = 1;
                    }
                    Subspace::from_cols(&m)
                };
                let mut seen: Vec<Vec<u8>> = Vec::new();
                for (i, e) in pre_table.iter().enumerate() {
                    let projected = e.namu.project(&coord_sub).expect("coordinate subspace");
                    let dropped = projected.map_subspaces(|s| drop_coords(s, b));
                    let key = dropped.canonical_key();
                    if !seen.contains(&key) {
                        seen.push(key);
                        table.push(Entry {
                            namu: dropped,
                            ev: Evidence::Shrink { pre: i },
                        });
                    }
                }
            }
            CompKind::Trim => {
                let pre_table = &tables[comp.children[c][0]];
                let mut seen: Vec<Vec<u8>> = Vec::new();
                for (i, e) in pre_table.iter().enumerate() {
                    let (trimmed, info) = e.namu.trim_with_info();
                    let safe = ksafe_extension_check(&e.namu, &trimmed, k as u32)
                        .map_err(|err| SolveError::EvidenceCorrupt(err.to_string()))?;
                    if !safe {
                        continue;
                    }
                    let key = trimmed.canonical_key();
                    if !seen.contains(&key) {
                        seen.push(key);
                        table.push(Entry {
                            namu: trimmed,
                            ev: Evidence::Trim { pre: i, info },
                        });
                    }
                }
            }
            CompKind::Compare => {
                let pre_table = &tables[comp.children[c][0]];
                let theta = tr.basis[v].cols();
                let mut seen: Vec<Vec<u8>> = Vec::new();
                for (i, e) in pre_table.iter().enumerate() {
                    let tau = e.namu.compactify();
                    assert!(tau.width() as usize <= k);
                    assert_size_bounds(&tau, theta, k);
                    let cert = tle(&e.namu, &tau)
                        .map_err(|err| SolveError::EvidenceCorrupt(err.to_string()))?
                        .ok_or_else(|| {
                            SolveError::EvidenceCorrupt(
                                "trim does not precede its compactification".into(),
                            )
                        })?;
                    let key = tau.canonical_key();
                    if !seen.contains(&key) {
                        seen.push(key);
                        table.push(Entry {
                            namu: tau,
                            ev: Evidence::Compare { pre: i, cert },
                        });
                    }
                }
                table = antichain(table)?;
            }
        }
        debug_assert!(table.iter().all(|e| e.namu.width() as usize <= k));
        trace.push(TraceRow {
            comp: c,
            kind: comp.kind[c],
            base_node: v,
            table_len: table.len(),
            max_namu_nodes: table.iter().map(|e| e.namu.tree().n()).max().unwrap_or(0),
        });
        tables[c] = table;
    }
    Ok(FullSetTable {
        comp,
        tables,
        trace,
    })
}

/// Keep only entries not strictly dominated by another; among mutually
/// dominating (equivalent) entries the earliest survives.
#[allow(clippy::needless_range_loop)]
fn antichain(entries: Vec<Entry>) -> Result<Vec<Entry>, SolveError> {
    let n = entries.len();
    let mut le = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                le[i][j] = tle(&entries[i].namu, &entries[j].namu)
                    .map_err(|e| SolveError::EvidenceCorrupt(e.to_string()))?
                    .is_some();
            }
        }
    }
    let mut keep = vec![true; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || !keep[i] {
                continue;
            }
            if le[j][i] && !le[i][j] {
                keep[i] = false; // strictly dominated
            } else if le[j][i] && le[i][j] && j < i {
                keep[i] = false; // equivalent, later copy
            }
        }
    }
    Ok(entries
        .into_iter()
        .enumerate()
        .filter_map(|(i, e)| if keep[i] { Some(e) } else { None })
        .collect())
}

fn assert_size_bounds(g: &BNamu, theta: usize, k: usize) {
    let d = g.tree().diameter();
    assert!(
        d <= (2 * theta + 1) * (2 * k + 1),
        "compact namu diameter {d} breaks the bound for theta={theta}, k={k}"
    );
    let d_odd = if d % 2 == 1 { d } else { d + 1 };
    let edge_bound = (1usize << ((d_odd + 3) / 2)).saturating_sub(3);
    assert!(
        g.tree().edges().len() <= edge_bound,
        "compact namu edge count breaks the diameter bound"
    );
}

/// Incremental builder for the decomposition assembled by the replay.
struct TreeBuilder {
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<usize>>,
}

impl TreeBuilder {
    fn new() -> TreeBuilder {
        TreeBuilder {
            adj: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn leaf(&mut self, part: usize) -> usize {
        self.adj.push(Vec::new());
        self.labels.push(Some(part));
        self.adj.len() - 1
    }

    fn internal(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.labels.push(None);
        self.adj.len() - 1
    }

    fn connect(&mut self, a: usize, b: usize) {
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    /// Join a piece sequence into one rooted piece. The sequence follows a
    /// subdivision path outward from its attachment point, and a postorder
    /// star run is right-associative, so the first piece stays shallowest:
    /// t1 t2 t3 * * is join(t1, join(t2, t3)).
    fn fold(&mut self, pieces: &[usize]) -> Option<usize> {
        let mut it = pieces.iter().rev();
        let mut cur = *it.next()?;
        for &p in it {
            let j = self.internal();
            self.connect(j, p);
            self.connect(j, cur);
            cur = j;
        }
        Some(cur)
    }
}

struct Replay<'a> {
    fs: &'a FullSetTable,
    chosen: Vec<usize>,
    builder: TreeBuilder,
}

/// Rebuild a rooted width-<= k branch-decomposition from the root namu's
/// evidence chain.
pub fn backtrack_decomposition(
    fs: &FullSetTable,
    root_entry: usize,
) -> Result<DecTree, SolveError> {
    let mut chosen = vec![usize::MAX; fs.comp.kind.len()];
    resolve(fs, fs.comp.root, root_entry, &mut chosen)?;
    let mut rp = Replay {
        fs,
        chosen,
        builder: TreeBuilder::new(),
    };
    let root_namu = &fs.tables[fs.comp.root][root_entry].namu;
    if root_namu.tree().n() != 1 {
        return Err(SolveError::EvidenceCorrupt(
            "root namu is not a single node".into(),
        ));
    }
    let pieces = rp.printnode(fs.comp.root, 0);
    let built = match pieces.len() {
        1 => pieces[0],
        2 => {
            let r = rp.builder.internal();
            rp.builder.connect(r, pieces[0]);
            rp.builder.connect(r, pieces[1]);
            r
        }
        n => {
            return Err(SolveError::EvidenceCorrupt(format!(
                "root expansion produced {n} pieces"
            )))
        }
    };
    let mut edges = Vec::new();
    for (u, nbrs) in rp.builder.adj.iter().enumerate() {
        for &w in nbrs {
            if u < w {
                edges.push((u, w));
            }
        }
    }
    let mut t = DecTree::from_edges(&edges, rp.builder.labels.clone());
    t = t.with_root(built);
    t.check()
        .map_err(|e| SolveError::EvidenceCorrupt(format!("replayed tree invalid: {e}")))?;
    Ok(t)
}

fn resolve(
    fs: &FullSetTable,
    comp: usize,
    entry: usize,
    chosen: &mut Vec<usize>,
) -> Result<(), SolveError> {
    chosen[comp] = entry;
    let e = fs.tables[comp]
        .get(entry)
        .ok_or_else(|| SolveError::EvidenceCorrupt("entry index out of table".into()))?;
    match &e.ev {
        Evidence::Leaf { .. } => Ok(()),
        Evidence::Join { i1, i2, .. } => {
            let cs = &fs.comp.children[comp];
            resolve(fs, cs[0], *i1, chosen)?;
            resolve(fs, cs[1], *i2, chosen)
        }
        Evidence::Shrink { pre } | Evidence::Trim { pre, .. } | Evidence::Compare { pre, .. } => {
            resolve(fs, fs.comp.children[comp][0], *pre, chosen)
        }
    }
}

impl<'a> Replay<'a> {
    fn entry(&self, comp: usize) -> &'a Entry {
        let idx = self.chosen[comp];
        &self.fs.tables[comp][idx]
    }

    /// Trees hung at a namu node of degree at most 2.
    fn printnode(&mut self, comp: usize, v: usize) -> Vec<usize> {
        let e = self.entry(comp);
        match &e.ev {
            Evidence::Leaf { part } => {
                let p = *part;
                vec![self.builder.leaf(p)]
            }
            Evidence::Join { pm, .. } => {
                if e.namu.tree().degree(v) > 2 {
                    return Vec::new();
                }
                let cs = self.fs.comp.children[comp].clone();
                let pm_m1 = pm.m1.branch.iter().position(|&h| h == v);
                let pm_m2 = pm.m2.branch.iter().position(|&h| h == v);
                match (pm_m1, pm_m2) {
                    (Some(v1), None) => self.printnode(cs[0], v1),
                    (None, Some(v2)) => self.printnode(cs[1], v2),
                    _ => Vec::new(),
                }
            }
            Evidence::Shrink { .. } => {
                let y = self.fs.comp.children[comp][0];
                self.printnode(y, v)
            }
            Evidence::Trim { info, .. } => {
                let y = self.fs.comp.children[comp][0];
                match info.clone() {
                    TrimInfo::Degenerate { edge: (du, dv) } => {
                        let mut out = self
                            .printsubtreemid(y, du, dv)
                            .into_iter()
                            .collect::<Vec<_>>();
                        out.extend(self.printsubtreemid(y, dv, du));
                        out
                    }
                    TrimInfo::Blocked { kept } => {
                        let old = kept[v];
                        let ytree = self.entry(y).namu.tree().clone();
                        let xtree = self.entry(comp).namu.tree().clone();
                        // trees attached at the node itself, plus whole cut
                        // branches when trimming reduced its degree
                        let mut out = self.printnode(y, old);
                        let here: Vec<usize> = xtree.adj(v).iter().map(|&(w, _)| kept[w]).collect();
                        for &(w, _) in ytree.adj(old) {
                            if !here.contains(&w) {
                                out.extend(self.printsubtree(y, old, w));
                            }
                        }
                        out
                    }
                }
            }
            Evidence::Compare { cert, .. } => {
                let y = self.fs.comp.children[comp][0];
                let h = cert.m2.branch[v];
                let m1pos = cert.m1.branch.iter().position(|&x| x == h);
                match m1pos {
                    Some(vy) => self.printnode(y, vy),
                    None => Vec::new(),
                }
            }
        }
    }

    /// Trees hung along the half-edge (v, e) of the namu at `comp`.
    fn printinc(&mut self, comp: usize, v: usize, eid: usize) -> Vec<usize> {
        let e = self.entry(comp);
        match &e.ev {
            Evidence::Leaf { .. } => Vec::new(),
            Evidence::Join { pm, .. } => {
                let cs = self.fs.comp.children[comp].clone();
                let mut out = Vec::new();
                let pats = [(0usize, pm.m1.clone()), (1usize, pm.m2.clone())];
                for (i, m) in pats {
                    if let Some(vp) = m.branch.iter().position(|&h| h == v) {
                        if let Some(ep) = m.edge_map[eid] {
                            // only when the pattern edge actually leaves vp
                            let child = cs[i];
                            let ptree = self.entry(child).namu.tree();
                            let (a, b) = ptree.edges()[ep];
                            if a == vp || b == vp {
                                out.extend(self.printinc(child, vp, ep));
                            }
                        }
                    }
                }
                out
            }
            Evidence::Shrink { .. } => {
                let y = self.fs.comp.children[comp][0];
                self.printinc(y, v, eid)
            }
            Evidence::Trim { info, .. } => {
                let y = self.fs.comp.children[comp][0];
                let TrimInfo::Blocked { kept } = info.clone() else {
                    return Vec::new();
                };
                let xtree = e.namu.tree();
                let (a, b) = xtree.edges()[eid];
                let ytree = self.entry(y).namu.tree();
                let ye = ytree
                    .edge_between(kept[a], kept[b])
                    .expect("trimmed edge kept in the pre-trim tree");
                self.printinc(y, kept[v], ye)
            }
            Evidence::Compare { cert, .. } => {
                let xtree = e.namu.tree();
                let (a, b) = xtree.edges()[eid];
                let w = if v == a { b } else { a };
                if v > w {
                    return Vec::new();
                }
                let y = self.fs.comp.children[comp][0];
                let cert = cert.clone();
                let hv = cert.m2.branch[v];
                let hw = cert.m2.branch[w];
                let path = cert.host.path(hv, hw);
                let mut out = Vec::new();
                for i in 1..path.len() {
                    let (p0, p1) = (path[i - 1], path[i]);
                    let he = cert.host.edge_between(p0, p1).expect("host edge");
                    let ye = cert.m1.edge_map[he].expect("spanning model covers every host edge");
                    if let Some(v0) = cert.m1.branch.iter().position(|&x| x == p0) {
                        out.extend(self.printinc(y, v0, ye));
                    }
                    if let Some(v1) = cert.m1.branch.iter().position(|&x| x == p1) {
                        out.extend(self.printincrev(y, v1, ye));
                        if i + 1 < path.len() {
                            out.extend(self.printnode(y, v1));
                        }
                    }
                }
                out
            }
        }
    }

    /// Reverse of the half-edge sequence.
    fn printincrev(&mut self, comp: usize, v: usize, eid: usize) -> Vec<usize> {
        let mut out = self.printinc(comp, v, eid);
        out.reverse();
        out
    }

    /// The whole branch hanging past the directed edge (u, v), as one tree.
    fn printsubtree(&mut self, comp: usize, u: usize, v: usize) -> Option<usize> {
        let tree = self.entry(comp).namu.tree().clone();
        let eid = tree.edge_between(u, v).expect("edge");
        let mut pieces = self.printinc(comp, u, eid);
        pieces.extend(self.printincrev(comp, v, eid));
        let nbrs: Vec<usize> = tree.adj(v).iter().map(|&(w, _)| w).collect();
        for w in nbrs {
            if w != u {
                pieces.extend(self.printsubtree(comp, v, w));
            }
        }
        pieces.extend(self.printnode(comp, v));
        self.builder.fold(&pieces)
    }

    /// Like printsubtree but skipping the near half-edge: used to fold the
    /// two sides of a degenerate edge around a fresh midpoint.
    fn printsubtreemid(&mut self, comp: usize, u: usize, v: usize) -> Option<usize> {
        let tree = self.entry(comp).namu.tree().clone();
        let eid = tree.edge_between(u, v).expect("edge");
        let mut pieces = self.printincrev(comp, v, eid);
        let nbrs: Vec<usize> = tree.adj(v).iter().map(|&(w, _)| w).collect();
        for w in nbrs {
            if w != u {
                pieces.extend(self.printsubtree(comp, v, w));
            }
        }
        pieces.extend(self.printnode(comp, v));
        self.builder.fold(&pieces)
    }
}

/// Outcome of a solve: a decomposition labeled by the arrangement's part
/// indices, or a proof that the width bound fails.
pub enum Outcome {
    /// Unrooted decomposition of the full original part set (0-based).
    Decomposition(DecTree),
    AboveK,
}

pub struct SolveStats {
    pub dp_runs: usize,
    pub max_table: usize,
    pub trace: Vec<(usize, Vec<TraceRow>)>,
}

/// The compression loop: grow the arrangement one part at a time, each
/// round extending the previous width-<= k decomposition by one leaf (width
/// at most 2k), recomputing its transcript, running the table DP and
/// replaying a witness.
pub fn iterative_compression(
    pre: &Preprocessed,
    k: usize,
    node_cap: usize,
    collect_trace: bool,
) -> Result<(Outcome, SolveStats), SolveError> {
    let mut stats = SolveStats {
        dp_runs: 0,
        max_table: 0,
        trace: Vec::new(),
    };
    let nz = pre.arr.n();
    // zero parts reattach anywhere; solve the nonzero core first
    let core: Option<DecTree> = match nz {
        0 => None,
        1 => Some(DecTree::single(0)),
        _ => {
            let mut cur = DecTree::two(0, 1);
            let w0 = cur.width(&pre.arr.prefix(2)).expect("labels fit").0;
            if w0 > k {
                return Ok((Outcome::AboveK, stats));
            }
            for i in 3..=nz {
                let arr_i = pre.arr.prefix(i);
                let extended = cur.add_leaf(i - 1);
                let rooted = extended.rooted();
                let bb = match boundary_bases(&rooted, &arr_i, 2 * k) {
                    Ok(b) => b,
                    Err(TranscriptError::WidthExceeded { node, .. }) => {
                        return Err(SolveError::EvidenceCorrupt(format!(
                            "extension exceeded width 2k at node {node}"
                        )))
                    }
                    Err(e) => return Err(SolveError::EvidenceCorrupt(e.to_string())),
                };
                let tr = build_transcript(&rooted, &arr_i, &bb)
                    .map_err(|e| SolveError::EvidenceCorrupt(e.to_string()))?;
                let fs = run_fullset_dp(&arr_i, k, &rooted, &tr, node_cap)?;
                stats.dp_runs += 1;
                for row in &fs.trace {
                    stats.max_table = stats.max_table.max(row.table_len);
                }
                if collect_trace {
                    stats.trace.push((i, fs.trace.clone()));
                }
                if fs.root_entries().is_empty() {
                    return Ok((Outcome::AboveK, stats));
                }
                let solved = backtrack_decomposition(&fs, 0)?;
                let unrooted = solved.smooth_root();
                let (w, _) = unrooted.width(&arr_i).expect("labels fit");
                if w > k {
                    return Err(SolveError::EvidenceCorrupt(format!(
                        "replayed decomposition has width {w} > k = {k}"
                    )));
                }
                cur = unrooted;
            }
            Some(cur)
        }
    };
    // relabel to original part ids, then hang the zero-dimensional parts
    let mut t = match core {
        None => None,
        Some(c) => {
            let edges = c.edges();
            let labels: Vec<Option<usize>> = (0..c.n())
                .map(|v| c.label(v).map(|p| pre.kept[p]))
                .collect();
            Some(DecTree::from_edges(&edges, labels))
        }
    };
    for &z in &pre.removed {
        t = Some(match t {
            None => DecTree::single(z),
            Some(cur) => cur.add_leaf(z),
        });
    }
    Ok((Outcome::Decomposition(t.expect("at least one part")), stats))
}

#[cfg(test)]
mod tests;
