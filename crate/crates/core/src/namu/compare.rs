//! The domination order on namus: `a` is below `b` when some pair of
//! subdivisions match exactly on tree shape, alpha and universe, with `a`'s
//! widths edgewise at most `b`'s. The search aligns the two trees'
//! degree-skeletons and then interleaves subdivision points along each
//! skeleton edge with a small grid reachability.

use super::model::{vec_eta, IncRef, TreeModel};
use super::{BNamu, NamuError, Tree};

/// A successful alignment: a common host tree together with spanning
/// subdivision models of both namus' trees.
#[derive(Debug, Clone)]
pub struct TleCert {
    pub host: Tree,
    pub m1: TreeModel,
    pub m2: TreeModel,
}

/// Decide `a` below-or-equivalent-to `b`; on success return the ensuring
/// tree and both models (the backtracking replay consumes them).
pub fn tle(a: &BNamu, b: &BNamu) -> Result<Option<TleCert>, NamuError> {
    if a.ambient() != b.ambient() {
        return Err(NamuError::AmbientMismatch {
            left: a.ambient(),
            right: b.ambient(),
        });
    }
    if a.universe() != b.universe() {
        return Ok(None);
    }
    let (ta, tb) = (a.tree(), b.tree());
    if ta.n() == 1 || tb.n() == 1 {
        if ta.n() == 1 && tb.n() == 1 {
            return Ok(Some(TleCert {
                host: Tree::single(),
                m1: TreeModel {
                    edge_map: vec![],
                    branch: vec![0],
                },
                m2: TreeModel {
                    edge_map: vec![],
                    branch: vec![0],
                },
            }));
        }
        return Ok(None);
    }
    let sa = Skeleton::of(ta);
    let sb = Skeleton::of(tb);
    if sa.nodes.len() != sb.nodes.len() || sa.edges.len() != sb.edges.len() {
        return Ok(None);
    }
    for iso in enumerate_isos(&sa, &sb) {
        if let Some(cert) = try_iso(a, b, &sa, &sb, &iso) {
            debug_assert!(verify_cert(a, b, &cert));
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Check a certificate against the definition: both models span the host,
/// alphas agree through the induced incidence maps, and a's widths are at
/// most b's on every host edge.
pub fn verify_cert(a: &BNamu, b: &BNamu, cert: &TleCert) -> bool {
    let host = &cert.host;
    if !super::model::is_model(host, &cert.m1, a.tree())
        || !super::model::is_model(host, &cert.m2, b.tree())
    {
        return false;
    }
    for (e, &(u, v)) in host.edges().iter().enumerate() {
        let (Some(f1), Some(f2)) = (cert.m1.edge_map[e], cert.m2.edge_map[e]) else {
            return false; // spanning models only
        };
        if a.lambda_at(f1) > b.lambda_at(f2) {
            return false;
        }
        for w in [u, v] {
            let IncRef::Covered { node: n1, edge: e1 } = vec_eta(host, a.tree(), &cert.m1, w, e)
            else {
                return false;
            };
            let IncRef::Covered { node: n2, edge: e2 } = vec_eta(host, b.tree(), &cert.m2, w, e)
            else {
                return false;
            };
            if a.alpha_at(n1, e1) != b.alpha_at(n2, e2) {
                return false;
            }
        }
    }
    true
}

/// The degree-skeleton: nodes of degree != 2 joined by maximal paths
/// through degree-2 nodes.
struct Skeleton {
    /// Original node ids of skeleton nodes.
    nodes: Vec<usize>,
    /// (skel index of one end, skel index of other end, full original node
    /// path from the first end, original edge ids along it).
    edges: Vec<SkelEdge>,
    adj: Vec<Vec<usize>>, // skel node idx -> skel edge idx list
}

struct SkelEdge {
    ends: (usize, usize),
    path_nodes: Vec<usize>,
    path_edges: Vec<usize>,
}

impl Skeleton {
    fn of(t: &Tree) -> Skeleton {
        let nodes: Vec<usize> = (0..t.n()).filter(|&v| t.degree(v) != 2).collect();
        let sidx = |v: usize| nodes.iter().position(|&x| x == v).unwrap();
        let mut edges = Vec::new();
        let mut seen_edge = vec![false; t.edges().len()];
        for &s in &nodes {
            for &(mut cur, mut via) in t.adj(s) {
                if seen_edge[via] {
                    continue;
                }
                let mut path_nodes = vec![s];
                let mut path_edges = Vec::new();
                let mut prev = s;
                loop {
                    path_edges.push(via);
                    seen_edge[via] = true;
                    path_nodes.push(cur);
                    if t.degree(cur) != 2 {
                        break;
                    }
                    let &(nx, ne) = t.adj(cur).iter().find(|&&(w, _)| w != prev).unwrap();
                    prev = cur;
                    cur = nx;
                    via = ne;
                }
                edges.push(SkelEdge {
                    ends: (sidx(s), sidx(*path_nodes.last().unwrap())),
                    path_nodes,
                    path_edges,
                });
            }
        }
        let mut adj = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            adj[e.ends.0].push(i);
            if e.ends.1 != e.ends.0 {
                adj[e.ends.1].push(i);
            }
        }
        Skeleton { nodes, edges, adj }
    }
}

/// All graph isomorphisms between the two skeletons, as maps on skeleton
/// node indices. Works through a stack of matched frontier pairs.
fn enumerate_isos(sa: &Skeleton, sb: &Skeleton) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let deg = |s: &Skeleton, i: usize| s.adj[i].len();
    let la = (0..sa.nodes.len())
        .find(|&i| deg(sa, i) <= 1)
        .expect("skeleton has a leaf");
    for lb in 0..sb.nodes.len() {
        if deg(sb, lb) != deg(sa, la) {
            continue;
        }
        let mut map = vec![usize::MAX; sa.nodes.len()];
        map[la] = lb;
        let mut stack = vec![(la, usize::MAX, lb, usize::MAX)];
        iso_step(sa, sb, &mut stack, &mut map, &mut out);
    }
    out
}

fn iso_step(
    sa: &Skeleton,
    sb: &Skeleton,
    stack: &mut Vec<(usize, usize, usize, usize)>,
    map: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let Some((x, from_a, y, from_b)) = stack.pop() else {
        debug_assert!(map.iter().all(|&m| m != usize::MAX));
        out.push(map.clone());
        return;
    };
    let next_a: Vec<usize> = sa.adj[x].iter().copied().filter(|&e| e != from_a).collect();
    let next_b: Vec<usize> = sb.adj[y].iter().copied().filter(|&e| e != from_b).collect();
    if next_a.len() == next_b.len() {
        if next_a.is_empty() {
            iso_step(sa, sb, stack, map, out);
        } else {
            for perm in permutations(next_b.len()) {
                let mut assigned = Vec::new();
                let mut ok = true;
                for (i, &ea) in next_a.iter().enumerate() {
                    let eb = next_b[perm[i]];
                    let na = other_skel_end(sa, ea, x);
                    let nb = other_skel_end(sb, eb, y);
                    if map[na] != usize::MAX {
                        ok = false;
                        break;
                    }
                    map[na] = nb;
                    assigned.push((na, ea, nb, eb));
                }
                if ok {
                    let before = stack.len();
                    for &pair in &assigned {
                        stack.push(pair);
                    }
                    iso_step(sa, sb, stack, map, out);
                    stack.truncate(before);
                }
                for &(na, _, _, _) in &assigned {
                    map[na] = usize::MAX;
                }
            }
        }
    }
    stack.push((x, from_a, y, from_b));
}

fn other_skel_end(s: &Skeleton, e: usize, from: usize) -> usize {
    let (a, b) = s.edges[e].ends;
    if a == from {
        b
    } else {
        a
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    match n {
        0 => vec![vec![]],
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => {
            let mut out = Vec::new();
            for i in 0..n {
                for rest in permutations(n - 1) {
                    let mut p = vec![i];
                    for r in rest {
                        p.push(if r >= i { r + 1 } else { r });
                    }
                    out.push(p);
                }
            }
            out
        }
    }
}

type Staircase = (OrientedPath, OrientedPath, Vec<(usize, usize)>);

/// Oriented view of one skeleton edge's path.
struct OrientedPath {
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

fn oriented(s: &Skeleton, e: usize, source_snode: usize) -> OrientedPath {
    let se = &s.edges[e];
    if se.ends.0 == source_snode {
        OrientedPath {
            nodes: se.path_nodes.clone(),
            edges: se.path_edges.clone(),
        }
    } else {
        let mut nodes = se.path_nodes.clone();
        let mut edges = se.path_edges.clone();
        nodes.reverse();
        edges.reverse();
        OrientedPath { nodes, edges }
    }
}

fn try_iso(a: &BNamu, b: &BNamu, sa: &Skeleton, sb: &Skeleton, map: &[usize]) -> Option<TleCert> {
    // each skeleton edge is aligned independently
    let mut staircases = Vec::new();
    for (ia, ea) in sa.edges.iter().enumerate() {
        let (xa, _ya) = ea.ends;
        let xb = map[xa];
        let yb = map[ea.ends.1];
        let ib = sb.edges.iter().position(|eb| {
            (eb.ends.0 == xb && eb.ends.1 == yb) || (eb.ends.0 == yb && eb.ends.1 == xb)
        })?;
        let pa = oriented(sa, ia, xa);
        let pb = oriented(sb, ib, xb);
        let cells = align_paths(a, b, &pa, &pb)?;
        staircases.push((pa, pb, cells));
    }
    Some(build_cert(a, b, sa, sb, map, &staircases))
}

/// Grid reachability over cells (i, j): host edge covering the i-th a-edge
/// and the j-th b-edge of the two oriented paths. Steps advance one or both
/// indices. Returns the cell sequence of a monotone staircase.
fn align_paths(
    a: &BNamu,
    b: &BNamu,
    pa: &OrientedPath,
    pb: &OrientedPath,
) -> Option<Vec<(usize, usize)>> {
    let p = pa.edges.len();
    let q = pb.edges.len();
    let ok = |i: usize, j: usize| -> bool {
        let (ea, fb) = (pa.edges[i - 1], pb.edges[j - 1]);
        a.lambda_at(ea) <= b.lambda_at(fb)
            && a.alpha_at(pa.nodes[i - 1], ea) == b.alpha_at(pb.nodes[j - 1], fb)
            && a.alpha_at(pa.nodes[i], ea) == b.alpha_at(pb.nodes[j], fb)
    };
    let mut reach = vec![vec![false; q + 1]; p + 1];
    if !ok(1, 1) {
        return None;
    }
    reach[1][1] = true;
    for i in 1..=p {
        for j in 1..=q {
            if !reach[i][j] {
                continue;
            }
            for (di, dj) in [(1, 0), (0, 1), (1, 1)] {
                let (ni, nj) = (i + di, j + dj);
                if ni <= p && nj <= q && ok(ni, nj) {
                    reach[ni][nj] = true;
                }
            }
        }
    }
    if !reach[p][q] {
        return None;
    }
    // backtrack, preferring the diagonal
    let mut cells = vec![(p, q)];
    let (mut i, mut j) = (p, q);
    while (i, j) != (1, 1) {
        let prev = [(i - 1, j - 1), (i - 1, j), (i, j - 1)];
        let &(pi, pj) = prev
            .iter()
            .find(|&&(x, y)| x >= 1 && y >= 1 && reach[x][y])
            .expect("reachable predecessor");
        cells.push((pi, pj));
        i = pi;
        j = pj;
    }
    cells.reverse();
    Some(cells)
}

fn build_cert(
    a: &BNamu,
    b: &BNamu,
    sa: &Skeleton,
    sb: &Skeleton,
    map: &[usize],
    staircases: &[Staircase],
) -> TleCert {
    // host nodes: one per skeleton node (of a), then staircase interiors
    let mut host_edges: Vec<(usize, usize)> = Vec::new();
    let mut lab1: Vec<usize> = Vec::new();
    let mut lab2: Vec<usize> = Vec::new();
    let mut next = sa.nodes.len();
    let mut br1 = vec![usize::MAX; a.tree().n()];
    let mut br2 = vec![usize::MAX; b.tree().n()];
    for (si, &orig) in sa.nodes.iter().enumerate() {
        br1[orig] = si;
        br2[sb.nodes[map[si]]] = si;
    }
    for (se, (pa, pb, cells)) in staircases.iter().enumerate() {
        let from_host = sa.edges[se].ends.0;
        let to_host = sa.edges[se].ends.1;
        let mut cur = from_host;
        for (t, &(i, j)) in cells.iter().enumerate() {
            let last = t + 1 == cells.len();
            let nxt = if last {
                to_host
            } else {
                let h = next;
                next += 1;
                h
            };
            host_edges.push((cur, nxt));
            lab1.push(pa.edges[i - 1]);
            lab2.push(pb.edges[j - 1]);
            if !last {
                let (ni, nj) = cells[t + 1];
                if ni > i {
                    br1[pa.nodes[i]] = nxt;
                }
                if nj > j {
                    br2[pb.nodes[j]] = nxt;
                }
            }
            cur = nxt;
        }
    }
    let host = Tree::new(next, &host_edges);
    let mut edge_map1 = vec![None; host.edges().len()];
    let mut edge_map2 = vec![None; host.edges().len()];
    for (k, &(u, v)) in host_edges.iter().enumerate() {
        let he = host.edge_between(u, v).expect("edge");
        edge_map1[he] = Some(lab1[k]);
        edge_map2[he] = Some(lab2[k]);
    }
    TleCert {
        host,
        m1: TreeModel {
            edge_map: edge_map1,
            branch: br1,
        },
        m2: TreeModel {
            edge_map: edge_map2,
            branch: br2,
        },
    }
}
