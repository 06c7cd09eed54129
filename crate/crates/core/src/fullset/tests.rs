use super::*;
use crate::arrangement::preprocess;
use crate::bdtree::BaseCtx;
use crate::field::FieldSpec;
use crate::linalg::test_rng::{random_mat, Rng};
use crate::oracle::{all_trees, brute_branchwidth, brute_fullset};

fn gf(p: u32) -> FieldSpec {
    FieldSpec::new(p).unwrap()
}

fn run_dp_on(
    a: &Arrangement,
    base: &DecTree,
    k: usize,
) -> Result<(FullSetTable, Transcript), SolveError> {
    let cap = base.width(a).unwrap().0.max(1);
    let bb = boundary_bases(base, a, cap).expect("cap fits");
    let tr = build_transcript(base, a, &bb).unwrap();
    let fs = run_fullset_dp(a, k, base, &tr, DEFAULT_NODE_CAP)?;
    Ok((fs, tr))
}

#[test]
fn leaf_tables_are_single_full_namus() {
    let mut rng = Rng(5);
    let m = random_mat(&mut rng, 4, 6, gf(2));
    let pre = preprocess(&m, &[2, 2, 2], 3).unwrap();
    if pre.arr.n() < 3 {
        return;
    }
    let base = all_trees(&[0, 1, 2])[0].rooted();
    let (fs, tr) = run_dp_on(&pre.arr, &base, 3).unwrap();
    for c in 0..fs.comp.kind.len() {
        if fs.comp.kind[c] == CompKind::Leaf {
            let v = fs.comp.base[c];
            assert_eq!(fs.tables[c].len(), 1);
            let g = &fs.tables[c][0].namu;
            assert!(g.is_single_node());
            assert_eq!(g.universe().dim(), tr.basis[v].cols());
            assert_eq!(
                g.universe(),
                &Subspace::full(tr.basis[v].cols(), pre.arr.spec())
            );
        }
    }
}

#[test]
fn two_part_arrangement_root_nonempty_iff_k_fits() {
    // V1 = V2 = a plane: the unique decomposition has width 2
    let f = gf(2);
    let m = Mat::from_rows(&[vec![1, 0, 1, 0], vec![0, 1, 0, 1]], f);
    let pre = preprocess(&m, &[2, 2], 2).unwrap();
    assert_eq!(pre.arr.n(), 2);
    let base = DecTree::two(0, 1).rooted();
    for k in 0..=3usize {
        let (fs, _) = run_dp_on(&pre.arr, &base, k).unwrap();
        let have = !fs.root_entries().is_empty();
        assert_eq!(have, k >= 2, "k={k}");
    }
}

#[test]
fn compression_matches_brute_force_small() {
    let mut rng = Rng(12);
    let mut rounds = 0;
    for p in [2u32, 3] {
        for _ in 0..30 {
            let n = 3 + rng.below(3); // 3..=5 parts
            let m = random_mat(&mut rng, 5, 2 * n, gf(p));
            let sizes = vec![2usize; n];
            let row_reduced = Arrangement::new(&m, &sizes);
            let (bw, _) = brute_branchwidth(&row_reduced).unwrap();
            for k in 0..=3usize {
                let pre = match preprocess(&m, &sizes, k) {
                    Ok(pre) => pre,
                    Err(_) => {
                        assert!(bw > k, "preprocess rejected a solvable instance");
                        continue;
                    }
                };
                let (outcome, _) =
                    iterative_compression(&pre, k, DEFAULT_NODE_CAP, false).expect("solver error");
                match outcome {
                    Outcome::Decomposition(t) => {
                        assert!(bw <= k, "solver found width <= {k} but brute says {bw}");
                        let (w, _) = t.width(&row_reduced).unwrap();
                        assert!(w <= k, "returned decomposition re-verifies to {w} > {k}");
                        assert_eq!(t.parts(), (0..n).collect::<Vec<_>>());
                    }
                    Outcome::AboveK => {
                        assert!(bw > k, "solver rejected though brute says {bw} <= {k}");
                    }
                }
                rounds += 1;
            }
        }
    }
    assert!(rounds > 60);
}

#[test]
fn zero_dimensional_parts_reattach() {
    // identity parts vanish under preprocessing at k = 1
    let f = gf(2);
    let m = Mat::identity(3, f);
    let pre = preprocess(&m, &[1, 1, 1], 1).unwrap();
    assert!(pre.kept.is_empty());
    let (outcome, _) = iterative_compression(&pre, 1, DEFAULT_NODE_CAP, false).unwrap();
    let Outcome::Decomposition(t) = outcome else {
        panic!("width-0 instance rejected");
    };
    assert_eq!(t.parts(), vec![0, 1, 2]);
    let row_reduced = Arrangement::new(&m, &[1, 1, 1]);
    assert_eq!(t.width(&row_reduced).unwrap().0, 0);
}

/// Convert an ambient-coordinates namu into the coordinates of an ordered
/// boundary basis.
fn to_basis_coords(g: &BNamu, basis: &Mat) -> BNamu {
    g.map_subspaces(|s| {
        let c = basis
            .solve(s.basis())
            .expect("subspace lies in the boundary");
        Subspace::from_cols(&c)
    })
}

/// The three-way semantics check of the compare tables against the
/// exhaustive construction: (a) emptiness agrees, (b) every achievable
/// reduced namu is dominated by a stored one, (c) every stored one is below
/// some achievable compactification.
#[test]
fn fullset_tables_match_brute_fullset() {
    let mut rng = Rng(23);
    let mut instances = 0;
    let mut nodes_checked = 0;
    'outer: for _ in 0..60 {
        if instances >= 12 {
            break;
        }
        let p = if rng.below(2) == 0 { 2 } else { 3 };
        let n = 3 + rng.below(2); // 3..=4
        let m = random_mat(&mut rng, 4, 2 * n, gf(p));
        let k = 1 + rng.below(2); // 1..=2
        let Ok(pre) = preprocess(&m, &vec![2usize; n], k) else {
            continue;
        };
        let a = pre.arr.clone();
        if a.n() < 3 {
            continue;
        }
        let parts: Vec<usize> = (0..a.n()).collect();
        let trees = all_trees(&parts);
        let base = trees[rng.below(trees.len())].rooted();
        let Ok((fs, tr)) = run_dp_on(&a, &base, k) else {
            continue 'outer;
        };
        let ctx = BaseCtx::new(&base, &a).unwrap();
        instances += 1;
        for x in 0..base.n() {
            if ctx.parts_below(x).len() < 2 {
                continue;
            }
            let comp = fs.comp.of_base[x];
            let stored: Vec<BNamu> = fs.tables[comp].iter().map(|e| e.namu.clone()).collect();
            let brute = brute_fullset(&ctx, x, k).unwrap();
            let brute_coords: Vec<BNamu> = brute
                .iter()
                .map(|g| to_basis_coords(g, &tr.basis[x]))
                .collect();
            // (a) emptiness agrees
            assert_eq!(
                stored.is_empty(),
                brute_coords.is_empty(),
                "emptiness mismatch at base node {x}"
            );
            // (b) coverage: every achievable tau(Delta) dominates something
            for d in &brute_coords {
                assert!(
                    stored.iter().any(|g| tle(g, d).unwrap().is_some()),
                    "achievable namu not covered at node {x}"
                );
            }
            // (c) soundness: every stored namu is below some achievable
            for g in &stored {
                assert!(
                    brute_coords.iter().any(|d| tle(g, d).unwrap().is_some()),
                    "stored namu not achievable at node {x}"
                );
            }
            nodes_checked += 1;
        }
    }
    assert!(
        instances >= 8 && nodes_checked >= 8,
        "too few instances ({instances})"
    );
}

#[test]
fn postorder_shape_for_three_parts() {
    let f = gf(2);
    let m = Mat::from_rows(&[vec![1, 0, 1], vec![0, 1, 1]], f);
    let pre = preprocess(&m, &[1, 1, 1], 1).unwrap();
    if pre.arr.n() < 3 {
        return;
    }
    let (outcome, _) = iterative_compression(&pre, 1, DEFAULT_NODE_CAP, false).unwrap();
    if let Outcome::Decomposition(t) = outcome {
        let s = t.rooted().postorder_string().unwrap();
        let stars = s.split_whitespace().filter(|w| *w == "*").count();
        let leaves = s.split_whitespace().filter(|w| *w != "*").count();
        assert_eq!(leaves, 3);
        assert_eq!(
            stars, 2,
            "three-leaf rooted shape prints i j k * *: got {s}"
        );
    }
}

/// Regression: piece sequences along subdivision paths must fold
/// right-associatively (the postorder star convention); the reversed fold
/// once built a width-3 tree on this GF(5) instance at k = 2.
#[test]
fn replay_fold_orientation_regression() {
    let spec = gf(5);
    let rows: Vec<Vec<u16>> = vec![
        vec![0, 3, 1, 0, 4, 2, 4, 1, 3, 4],
        vec![0, 1, 1, 3, 1, 2, 4, 1, 3, 2],
        vec![2, 2, 1, 2, 3, 4, 0, 4, 0, 2],
        vec![0, 2, 2, 1, 3, 0, 3, 0, 3, 0],
        vec![3, 1, 3, 3, 2, 4, 2, 2, 2, 2],
        vec![2, 3, 3, 0, 2, 0, 0, 1, 1, 1],
    ];
    let mat = Mat::from_rows(&rows, spec);
    let sizes = vec![1, 2, 2, 2, 1, 1, 1];
    let pre = preprocess(&mat, &sizes, 2).unwrap();
    let (outcome, _) = iterative_compression(&pre, 2, DEFAULT_NODE_CAP, false).unwrap();
    let Outcome::Decomposition(t) = outcome else {
        panic!("instance has branch-width 2 and must solve at k=2");
    };
    let row_reduced = Arrangement::new(&mat, &sizes);
    assert!(t.width(&row_reduced).unwrap().0 <= 2);
}

#[test]
fn resource_cap_surfaces() {
    // a tiny cap forces ResourceExceeded on any join of nontrivial namus
    let mut rng = Rng(9);
    for _ in 0..20 {
        let m = random_mat(&mut rng, 5, 8, gf(2));
        let Ok(pre) = preprocess(&m, &[2, 2, 2, 2], 2) else {
            continue;
        };
        if pre.arr.n() < 4 {
            continue;
        }
        match iterative_compression(&pre, 2, 2, false) {
            Err(SolveError::ResourceExceeded { cap, .. }) => {
                assert_eq!(cap, 2);
                return;
            }
            _ => continue,
        }
    }
    panic!("no instance triggered the cap");
}
