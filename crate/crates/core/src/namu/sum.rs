//! Sums of namus over pair models, and exhaustive enumeration of all sums
//! of two namus up to decorated-tree isomorphism.
//!
//! The enumerator builds host trees top-down from a root leaf of the first
//! tree. Walking away from the root, every host edge carries the pattern
//! edge of each tree currently being subdivided (either, or both when the
//! two trees share a stretch). The pair-model axioms pin down which local
//! events are possible at the next node; the generator branches over
//! exactly those.

use super::model::{is_pair_model, vec_eta, IncRef, PairModel, TreeModel};
use super::{BNamu, NamuError, Tree};
use crate::linalg::Subspace;

/// The sum of two namus along a given pair model.
pub fn sum_by_model(g1: &BNamu, g2: &BNamu, pm: &PairModel) -> BNamu {
    let host = &pm.host;
    let u_plus = g1.universe().sum(g2.universe()).expect("same ambient");
    let dim_uu = g1
        .universe()
        .intersect(g2.universe())
        .expect("same ambient")
        .dim() as i64;
    let fetch = |g: &BNamu, pat: &Tree, m: &TreeModel, v: usize, e: usize| -> Subspace {
        match vec_eta(host, pat, m, v, e) {
            IncRef::Covered { node, edge } => g.alpha_at(node, edge).clone(),
            IncRef::Star => g.universe().clone(),
            IncRef::Zero => Subspace::zero(g.ambient(), g.universe().spec()),
        }
    };
    let lam = |g: &BNamu, m: &TreeModel, e: usize| -> i64 {
        m.edge_map[e].map_or(0, |f| g.lambda_at(f) as i64)
    };
    let mut alpha = Vec::new();
    let mut lambda = Vec::new();
    for (e, &(u, v)) in host.edges().iter().enumerate() {
        let a1u = fetch(g1, g1.tree(), &pm.m1, u, e);
        let a1v = fetch(g1, g1.tree(), &pm.m1, v, e);
        let a2u = fetch(g2, g2.tree(), &pm.m2, u, e);
        let a2v = fetch(g2, g2.tree(), &pm.m2, v, e);
        let l = lam(g1, &pm.m1, e) + lam(g2, &pm.m2, e)
            - a1v.intersect(&a2v).expect("ambient").dim() as i64
            - a1u.intersect(&a2u).expect("ambient").dim() as i64
            + dim_uu;
        assert!(l >= 0, "sum width formula went negative");
        alpha.push([
            a1u.sum(&a2u).expect("ambient"),
            a1v.sum(&a2v).expect("ambient"),
        ]);
        lambda.push(l as u32);
    }
    BNamu::new(host.clone(), alpha, lambda, u_plus).expect("sum is a valid namu")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cursor {
    pe: usize,
    target: usize,
}

#[derive(Debug, Clone)]
struct Obligation {
    parent: usize,
    c1: Option<Cursor>,
    c2: Option<Cursor>,
    /// This branch still owes the placement of tree 2.
    duty: bool,
}

struct Gen<'a> {
    t1: &'a Tree,
    t2: &'a Tree,
    nodes: usize,
    edges: Vec<(usize, usize)>,
    lab1: Vec<Option<usize>>,
    lab2: Vec<Option<usize>>,
    br1: Vec<usize>,
    br2: Vec<usize>,
    hosts: Vec<PairModel>,
}

/// All pair models of the two trees, hosts built up to the exact node
/// count forced by the model axioms.
pub fn enumerate_pair_models(t1: &Tree, t2: &Tree) -> Vec<PairModel> {
    if t1.n() == 1 && t2.n() == 1 {
        let host = Tree::new(2, &[(0, 1)]);
        let mk = |a: usize, b: usize| PairModel {
            host: Tree::new(2, &[(0, 1)]),
            m1: TreeModel {
                edge_map: vec![None],
                branch: vec![a],
            },
            m2: TreeModel {
                edge_map: vec![None],
                branch: vec![b],
            },
        };
        let _ = host;
        return vec![mk(0, 1), mk(1, 0)];
    }
    if t1.n() == 1 || t2.n() == 1 {
        let (single_first, big, small) = if t1.n() == 1 {
            (true, t2, t1)
        } else {
            (false, t1, t2)
        };
        let _ = small;
        // subdivide one edge of the big tree, hang the lone node there
        let mut out = Vec::new();
        for (f, &(p, q)) in big.edges().iter().enumerate() {
            let n = big.n();
            let mid = n;
            let leaf = n + 1;
            let mut edges: Vec<(usize, usize)> = big
                .edges()
                .iter()
                .enumerate()
                .filter(|&(e, _)| e != f)
                .map(|(_, &uv)| uv)
                .collect();
            edges.push((p, mid));
            edges.push((mid, q));
            edges.push((mid, leaf));
            let host = Tree::new(n + 2, &edges);
            let mut big_map = vec![None; host.edges().len()];
            for (he, &(u, v)) in host.edges().iter().enumerate() {
                if u == mid || v == mid {
                    let other = if u == mid { v } else { u };
                    if other == leaf {
                        continue;
                    }
                    big_map[he] = Some(f);
                } else {
                    big_map[he] = Some(big.edge_between(u, v).expect("kept edge"));
                }
            }
            let m_big = TreeModel {
                edge_map: big_map,
                branch: (0..n).collect(),
            };
            let m_small = TreeModel {
                edge_map: vec![None; host.edges().len()],
                branch: vec![leaf],
            };
            let (m1, m2) = if single_first {
                (m_small, m_big)
            } else {
                (m_big, m_small)
            };
            out.push(PairModel { host, m1, m2 });
        }
        return out;
    }
    let mut out = bridge_pair_models(t1, t2);
    let mut g = Gen {
        t1,
        t2,
        nodes: 1,
        edges: Vec::new(),
        lab1: Vec::new(),
        lab2: Vec::new(),
        br1: vec![usize::MAX; t1.n()],
        br2: vec![usize::MAX; t2.n()],
        hosts: Vec::new(),
    };
    let a1 = *t1.leaves().first().expect("leaf");
    g.br1[a1] = 0;
    let (nbr, pe) = t1.adj(a1)[0];
    let mut pending = vec![Obligation {
        parent: 0,
        c1: Some(Cursor { pe, target: nbr }),
        c2: None,
        duty: true,
    }];
    g.run(&mut pending);
    out.extend(g.hosts);
    out
}

/// Hosts where the two models occupy disjoint regions joined by a single
/// uncovered bridge: one edge of each tree is subdivided once and the two
/// new nodes are connected.
fn bridge_pair_models(t1: &Tree, t2: &Tree) -> Vec<PairModel> {
    let (n1, n2) = (t1.n(), t2.n());
    let mut out = Vec::new();
    for (f1, &(p1, q1)) in t1.edges().iter().enumerate() {
        for (f2, &(p2, q2)) in t2.edges().iter().enumerate() {
            let v = n1 + n2;
            let w = n1 + n2 + 1;
            let mut edges: Vec<(usize, usize)> = Vec::new();
            for (e, &(a, b)) in t1.edges().iter().enumerate() {
                if e != f1 {
                    edges.push((a, b));
                }
            }
            edges.push((p1, v));
            edges.push((v, q1));
            for (e, &(a, b)) in t2.edges().iter().enumerate() {
                if e != f2 {
                    edges.push((a + n1, b + n1));
                }
            }
            edges.push((p2 + n1, w));
            edges.push((w, q2 + n1));
            edges.push((v, w));
            let host = Tree::new(n1 + n2 + 2, &edges);
            let mut em1 = vec![None; host.edges().len()];
            let mut em2 = vec![None; host.edges().len()];
            for (he, &(a, b)) in host.edges().iter().enumerate() {
                if a < n1 && b < n1 {
                    em1[he] = Some(t1.edge_between(a, b).expect("t1 edge"));
                } else if a == v || b == v {
                    let other = if a == v { b } else { a };
                    if other != w {
                        em1[he] = Some(f1);
                    }
                } else if a < n1 + n2 && b < n1 + n2 && a >= n1 && b >= n1 {
                    em2[he] = Some(t2.edge_between(a - n1, b - n1).expect("t2 edge"));
                } else if a == w || b == w {
                    let other = if a == w { b } else { a };
                    if other != v {
                        em2[he] = Some(f2);
                    }
                }
            }
            out.push(PairModel {
                host,
                m1: TreeModel {
                    edge_map: em1,
                    branch: (0..n1).collect(),
                },
                m2: TreeModel {
                    edge_map: em2,
                    branch: (n1..n1 + n2).collect(),
                },
            });
        }
    }
    out
}

impl Gen<'_> {
    fn run(&mut self, pending: &mut Vec<Obligation>) {
        let Some(ob) = pending.pop() else {
            self.emit();
            return;
        };
        let t = self.nodes;
        self.nodes += 1;
        self.edges.push((ob.parent, t));
        self.lab1.push(ob.c1.map(|c| c.pe));
        self.lab2.push(ob.c2.map(|c| c.pe));

        for ev in self.events(&ob, t) {
            for &(tree, pn) in &ev.set_branch {
                if tree == 1 {
                    self.br1[pn] = t;
                } else {
                    self.br2[pn] = t;
                }
            }
            let before = pending.len();
            for (c1, c2, duty) in ev.children.iter().cloned() {
                pending.push(Obligation {
                    parent: t,
                    c1,
                    c2,
                    duty,
                });
            }
            self.run(pending);
            pending.truncate(before);
            for &(tree, pn) in &ev.set_branch {
                if tree == 1 {
                    self.br1[pn] = usize::MAX;
                } else {
                    self.br2[pn] = usize::MAX;
                }
            }
        }

        self.lab2.pop();
        self.lab1.pop();
        self.edges.pop();
        self.nodes -= 1;
        pending.push(ob);
    }

    fn emit(&mut self) {
        debug_assert!(self.br1.iter().all(|&b| b != usize::MAX));
        debug_assert!(self.br2.iter().all(|&b| b != usize::MAX));
        let host = Tree::new(self.nodes, &self.edges);
        // realign edge labels with the sorted edge indexing of Tree
        let mut lab1 = vec![None; self.edges.len()];
        let mut lab2 = vec![None; self.edges.len()];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            let he = host.edge_between(u, v).expect("edge");
            lab1[he] = self.lab1[i];
            lab2[he] = self.lab2[i];
        }
        let pm = PairModel {
            host,
            m1: TreeModel {
                edge_map: lab1,
                branch: self.br1.clone(),
            },
            m2: TreeModel {
                edge_map: lab2,
                branch: self.br2.clone(),
            },
        };
        debug_assert!(
            is_pair_model(&pm, self.t1, self.t2),
            "generator produced a non-model"
        );
        self.hosts.push(pm);
    }

    fn events(&self, ob: &Obligation, t: usize) -> Vec<Event> {
        let mut out = Vec::new();
        match (ob.c1, ob.c2) {
            (Some(c1), Some(c2)) => {
                debug_assert!(!ob.duty);
                // both continue, diverging
                out.push(Event {
                    children: vec![(Some(c1), None, false), (None, Some(c2), false)],
                    set_branch: vec![],
                });
                // tree 2 arrives; all host edges at t must stay inside eta2
                let v2 = c2.target;
                let others2: Vec<Cursor> = self
                    .t2
                    .adj(v2)
                    .iter()
                    .filter(|&&(_, pe)| pe != c2.pe)
                    .map(|&(pn, pe)| Cursor { pe, target: pn })
                    .collect();
                match others2.len() {
                    1 => out.push(Event {
                        children: vec![(Some(c1), Some(others2[0]), false)],
                        set_branch: vec![(2, v2)],
                    }),
                    2 => {
                        for share in 0..2 {
                            out.push(Event {
                                children: vec![
                                    (Some(c1), Some(others2[share]), false),
                                    (None, Some(others2[1 - share]), false),
                                ],
                                set_branch: vec![(2, v2)],
                            });
                        }
                    }
                    _ => {}
                }
                // tree 1 arrives
                let v1 = c1.target;
                let others1: Vec<Cursor> = self
                    .t1
                    .adj(v1)
                    .iter()
                    .filter(|&&(_, pe)| pe != c1.pe)
                    .map(|&(pn, pe)| Cursor { pe, target: pn })
                    .collect();
                match others1.len() {
                    1 => out.push(Event {
                        children: vec![(Some(others1[0]), Some(c2), false)],
                        set_branch: vec![(1, v1)],
                    }),
                    2 => {
                        for share in 0..2 {
                            out.push(Event {
                                children: vec![
                                    (Some(others1[share]), Some(c2), false),
                                    (Some(others1[1 - share]), None, false),
                                ],
                                set_branch: vec![(1, v1)],
                            });
                        }
                    }
                    _ => {}
                }
                // both arrive: only at two coincident degree-3 branch nodes
                if others1.len() == 2 && others2.len() == 2 {
                    for pairing in 0..2 {
                        out.push(Event {
                            children: vec![
                                (Some(others1[0]), Some(others2[pairing]), false),
                                (Some(others1[1]), Some(others2[1 - pairing]), false),
                            ],
                            set_branch: vec![(1, v1), (2, v2)],
                        });
                    }
                }
            }
            (Some(c1), None) => {
                let v1 = c1.target;
                let others1: Vec<Cursor> = self
                    .t1
                    .adj(v1)
                    .iter()
                    .filter(|&&(_, pe)| pe != c1.pe)
                    .map(|&(pn, pe)| Cursor { pe, target: pn })
                    .collect();
                // plain arrival of tree 1
                match others1.len() {
                    0 => {
                        if !ob.duty {
                            out.push(Event {
                                children: vec![],
                                set_branch: vec![(1, v1)],
                            });
                        }
                    }
                    1 => out.push(Event {
                        children: vec![(Some(others1[0]), None, ob.duty)],
                        set_branch: vec![(1, v1)],
                    }),
                    2 => {
                        let duty_slots: &[usize] = if ob.duty { &[0, 1] } else { &[usize::MAX] };
                        for &d in duty_slots {
                            out.push(Event {
                                children: vec![
                                    (Some(others1[0]), None, d == 0),
                                    (Some(others1[1]), None, d == 1),
                                ],
                                set_branch: vec![(1, v1)],
                            });
                        }
                    }
                    _ => {}
                }
                // tree 2 enters here, splitting an edge in the middle
                if ob.duty {
                    for (f2, &(p, q)) in self.t2.edges().iter().enumerate() {
                        let cp = Cursor { pe: f2, target: p };
                        let cq = Cursor { pe: f2, target: q };
                        // cursor 1 keeps going, sharing one side
                        for (shared, lone) in [(cp, cq), (cq, cp)] {
                            out.push(Event {
                                children: vec![
                                    (Some(c1), Some(shared), false),
                                    (None, Some(lone), false),
                                ],
                                set_branch: vec![],
                            });
                        }
                        // or tree 1 arrives at a degree-3 node, fully shared
                        if others1.len() == 2 {
                            for pairing in 0..2 {
                                let (x, y) = if pairing == 0 { (cp, cq) } else { (cq, cp) };
                                out.push(Event {
                                    children: vec![
                                        (Some(others1[0]), Some(x), false),
                                        (Some(others1[1]), Some(y), false),
                                    ],
                                    set_branch: vec![(1, v1)],
                                });
                            }
                        }
                    }
                }
            }
            (None, Some(c2)) => {
                debug_assert!(!ob.duty);
                let v2 = c2.target;
                let others2: Vec<Cursor> = self
                    .t2
                    .adj(v2)
                    .iter()
                    .filter(|&&(_, pe)| pe != c2.pe)
                    .map(|&(pn, pe)| Cursor { pe, target: pn })
                    .collect();
                match others2.len() {
                    0 => out.push(Event {
                        children: vec![],
                        set_branch: vec![(2, v2)],
                    }),
                    1 => out.push(Event {
                        children: vec![(None, Some(others2[0]), false)],
                        set_branch: vec![(2, v2)],
                    }),
                    2 => out.push(Event {
                        children: vec![
                            (None, Some(others2[0]), false),
                            (None, Some(others2[1]), false),
                        ],
                        set_branch: vec![(2, v2)],
                    }),
                    _ => {}
                }
            }
            (None, None) => unreachable!("empty obligation"),
        }
        let _ = t;
        out
    }
}

struct Event {
    children: Vec<(Option<Cursor>, Option<Cursor>, bool)>,
    set_branch: Vec<(usize, usize)>,
}

/// Every sum of the two namus, up to decorated-tree isomorphism, with the
/// pair model that produced each representative. Fails fast when the host
/// size forced by the model axioms would exceed `cap` nodes.
pub fn enumerate_sums(
    g1: &BNamu,
    g2: &BNamu,
    cap: usize,
) -> Result<Vec<(BNamu, PairModel)>, NamuError> {
    if g1.ambient() != g2.ambient() {
        return Err(NamuError::AmbientMismatch {
            left: g1.ambient(),
            right: g2.ambient(),
        });
    }
    let (n1, n2) = (g1.tree().n(), g2.tree().n());
    let needed = if n1 >= 2 && n2 >= 2 {
        n1 + n2 + 2
    } else if n1 == 1 && n2 == 1 {
        2
    } else {
        n1 + n2 + 1
    };
    if needed > cap {
        return Err(NamuError::ResourceExceeded { needed, cap });
    }
    let mut out: Vec<(BNamu, PairModel)> = Vec::new();
    let mut seen: Vec<Vec<u8>> = Vec::new();
    for pm in enumerate_pair_models(g1.tree(), g2.tree()) {
        assert_eq!(pm.host.n(), needed, "host node count off the forced size");
        let s = sum_by_model(g1, g2, &pm);
        let key = s.canonical_key();
        if !seen.contains(&key) {
            seen.push(key);
            out.push((s, pm));
        }
    }
    Ok(out)
}
