//! Long randomized soak against the brute-force oracle: wider field and
//! size coverage than the acceptance suite. Ignored by default; run with
//! `cargo test -p branchwidth --test soak -- --ignored --nocapture`.

use branchwidth::arrangement::Arrangement;
use branchwidth::field::FieldSpec;
use branchwidth::frontends::solve;
use branchwidth::fullset::{Outcome, DEFAULT_NODE_CAP};
use branchwidth::linalg::Mat;
use branchwidth::oracle::brute_branchwidth;

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

#[test]
#[ignore = "ten-minute randomized soak"]
fn solver_agrees_with_brute_force_widely() {
    let mut rng = Rng(0xC0FFEE);
    let mut solves = 0usize;
    for round in 0..600 {
        let p = [2u32, 3, 5][round % 3];
        let spec = FieldSpec::new(p).unwrap();
        let n = 3 + rng.below(5); // 3..=7
        let r = 3 + rng.below(5); // 3..=7
        let sizes: Vec<usize> = (0..n).map(|_| 1 + rng.below(2)).collect();
        let m: usize = sizes.iter().sum();
        let rows: Vec<Vec<u16>> = (0..r)
            .map(|_| (0..m).map(|_| rng.below(p as usize) as u16).collect())
            .collect();
        let mat = Mat::from_rows(&rows, spec);
        let row_reduced = Arrangement::new(&mat, &sizes);
        let (bw, _) = brute_branchwidth(&row_reduced).unwrap();
        for k in 0..=4usize {
            let (outcome, _) =
                solve(&mat, &sizes, k, DEFAULT_NODE_CAP, false).unwrap_or_else(|e| {
                    panic!("round {round} p={p} n={n} r={r} k={k} sizes={sizes:?} mat={mat:?}: {e}")
                });
            match outcome {
                Outcome::Decomposition(t) => {
                    assert!(
                        bw <= k,
                        "round {round} p={p} n={n}: found at k={k}, brute {bw}"
                    );
                    let (w, _) = t.width(&row_reduced).unwrap();
                    assert!(w <= k, "round {round}: witness width {w} > {k}");
                }
                Outcome::AboveK => {
                    assert!(
                        bw > k,
                        "round {round} p={p} n={n}: rejected at k={k}, brute {bw}"
                    );
                }
            }
            solves += 1;
        }
    }
    println!("soak: {solves} solves agree with the oracle");
}
