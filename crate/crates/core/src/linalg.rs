//! Exact dense matrices over GF(p) and the three subspace operations
//! (containment, sum, intersection), plus transition-matrix application.
//!
//! Matrices are row-major `u16` entries. Subspaces are kept in a canonical
//! column-reduced echelon form so that two `Subspace` values are equal as
//! Rust values exactly when they span the same set of vectors; this gives
//! cheap equality and hashing for the dynamic-programming tables built on
//! top of this module.

use crate::field::FieldSpec;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    AmbientMismatch {
        left: usize,
        right: usize,
    },
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::AmbientMismatch { left, right } => {
                write!(f, "ambient dimensions differ: {left} vs {right}")
            }
            LinalgError::ShapeMismatch { left, right } => {
                write!(f, "matrix shapes incompatible: {left:?} vs {right:?}")
            }
        }
    }
}

impl std::error::Error for LinalgError {}

/// Dense matrix over GF(p), row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    spec: FieldSpec,
    data: Vec<u16>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Mat {}x{} mod {} [",
            self.rows,
            self.cols,
            self.spec.modulus()
        )?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = u16;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &u16 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut u16 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mat {
    pub fn zero(rows: usize, cols: usize, spec: FieldSpec) -> Mat {
        Mat {
            rows,
            cols,
            spec,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, spec: FieldSpec) -> Mat {
        let mut m = Mat::zero(n, n, spec);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u16>], spec: FieldSpec) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            for &x in row {
                assert!(x < spec.modulus(), "entry {x} out of range");
                data.push(x);
            }
        }
        Mat {
            rows: r,
            cols: c,
            spec,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn row(&self, r: usize) -> &[u16] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u16> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.cols, self.rows, self.spec);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut m = Mat::zero(rows.len(), cols.len(), self.spec);
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m[(i, j)] = self[(r, c)];
            }
        }
        m
    }

    pub fn columns(&self, cols: &[usize]) -> Mat {
        let all_rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&all_rows, cols)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let mut m = Mat::zero(self.rows, self.cols + other.cols, self.spec);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)];
            }
            for c in 0..other.cols {
                m[(r, self.cols + c)] = other[(r, c)];
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let f = self.spec;
        let p = f.modulus() as u64;
        let mut out = Mat::zero(self.rows, other.cols, f);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = 0u64;
                for k in 0..self.cols {
                    acc += self[(r, k)] as u64 * other[(k, c)] as u64;
                    if acc >= u64::MAX - (p - 1) * (p - 1) {
                        acc %= p;
                    }
                }
                out[(r, c)] = (acc % p) as u16;
            }
        }
        Ok(out)
    }

    /// Reduced row echelon form with zero rows removed, plus pivot columns.
    ///
    /// The submatrix on the pivot columns is an identity. Over GF(2) the
    /// elimination runs on bit-packed rows.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        if self.spec.modulus() == 2 {
            self.rref_gf2()
        } else {
            self.rref_generic()
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    #[allow(clippy::needless_range_loop)]
    fn rref_generic(&self) -> (Mat, Vec<usize>) {
        let f = self.spec;
        let mut rows: Vec<Vec<u16>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for c in 0..self.cols {
            let Some(sel) = (pr..rows.len()).find(|&r| rows[r][c] != 0) else {
                continue;
            };
            rows.swap(pr, sel);
            let inv = f.inv(rows[pr][c]).expect("nonzero pivot");
            if inv != 1 {
                for x in rows[pr][c..].iter_mut() {
                    *x = f.mul(*x, inv);
                }
            }
            for r in 0..rows.len() {
                if r != pr && rows[r][c] != 0 {
                    let factor = rows[r][c];
                    for cc in c..self.cols {
                        let sub = f.mul(factor, rows[pr][cc]);
                        rows[r][cc] = f.sub(rows[r][cc], sub);
                    }
                }
            }
            pivots.push(c);
            pr += 1;
            if pr == rows.len() {
                break;
            }
        }
        rows.truncate(pr);
        let mut out = Mat::zero(pr, self.cols, f);
        for (r, row) in rows.iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                out[(r, c)] = x;
            }
        }
        (out, pivots)
    }

    fn rref_gf2(&self) -> (Mat, Vec<usize>) {
        let words = self.cols.div_ceil(64).max(1);
        let mut packed: Vec<Vec<u64>> = (0..self.rows)
            .map(|r| {
                let mut w = vec![0u64; words];
                for c in 0..self.cols {
                    if self[(r, c)] != 0 {
                        w[c / 64] |= 1 << (c % 64);
                    }
                }
                w
            })
            .collect();
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for c in 0..self.cols {
            let (wi, bi) = (c / 64, c % 64);
            let Some(sel) = (pr..packed.len()).find(|&r| packed[r][wi] >> bi & 1 == 1) else {
                continue;
            };
            packed.swap(pr, sel);
            let pivot_row = packed[pr].clone();
            for (r, row) in packed.iter_mut().enumerate() {
                if r != pr && row[wi] >> bi & 1 == 1 {
                    for (w, pw) in row.iter_mut().zip(&pivot_row) {
                        *w ^= pw;
                    }
                }
            }
            pivots.push(c);
            pr += 1;
            if pr == packed.len() {
                break;
            }
        }
        let mut out = Mat::zero(pr, self.cols, self.spec);
        for r in 0..pr {
            for c in 0..self.cols {
                out[(r, c)] = (packed[r][c / 64] >> (c % 64) & 1) as u16;
            }
        }
        (out, pivots)
    }

    /// Greedy (leftmost-first) subset of `cols` whose columns form a basis
    /// of the span of all `cols` columns of `self`.
    pub fn col_basis_of(&self, cols: &[usize]) -> Vec<usize> {
        let sub = self.columns(cols);
        let (_, piv) = sub.rref();
        piv.into_iter().map(|j| cols[j]).collect()
    }

    /// Greedy subset of `rows` forming a row basis of the submatrix on
    /// `(rows, cols)`.
    pub fn row_basis_of(&self, rows: &[usize], cols: &[usize]) -> Vec<usize> {
        let sub = self.submatrix(rows, cols).transpose();
        let (_, piv) = sub.rref();
        piv.into_iter().map(|i| rows[i]).collect()
    }

    /// Solve `self * X = rhs` for X; `None` when infeasible.
    pub fn solve(&self, rhs: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, rhs.rows);
        let aug = self.hcat(rhs);
        let (red, piv) = aug.rref();
        // any pivot in the rhs block means an inconsistent column
        if piv.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Mat::zero(self.cols, rhs.cols, self.spec);
        for (r, &pc) in piv.iter().enumerate() {
            for c in 0..rhs.cols {
                x[(pc, c)] = red[(r, self.cols + c)];
            }
        }
        // check: non-pivot free columns were set to zero, so verify exactly
        let check = self.mul(&x).unwrap();
        if &check == rhs {
            Some(x)
        } else {
            None
        }
    }

    /// Basis of the null space `{x : self * x = 0}`, as matrix columns.
    pub fn null_space(&self) -> Mat {
        let (red, piv) = self.rref();
        let f = self.spec;
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let mut basis = Mat::zero(self.cols, free.len(), f);
        for (j, &fc) in free.iter().enumerate() {
            basis[(fc, j)] = 1;
            for (r, &pc) in piv.iter().enumerate() {
                basis[(pc, j)] = f.neg(red[(r, fc)]);
            }
        }
        basis
    }

    /// Entry-wise map into another modulus-compatible matrix; test helper.
    pub fn map<F: Fn(u16) -> u16>(&self, g: F) -> Mat {
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            *x = g(*x);
        }
        m
    }
}

/// A subspace of GF(p)^ambient, stored as a canonical column-reduced
/// echelon basis. Equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} of F^{})", self.dim(), self.ambient)?;
        if self.dim() > 0 {
            write!(f, " {:?}", self.basis)?;
        }
        Ok(())
    }
}

impl Subspace {
    /// Span of the columns of `cols` (an `ambient x k` matrix).
    pub fn from_cols(cols: &Mat) -> Subspace {
        let (red, _) = cols.transpose().rref();
        Subspace {
            ambient: cols.rows(),
            basis: red.transpose(),
        }
    }

    pub fn zero(ambient: usize, spec: FieldSpec) -> Subspace {
        Subspace {
            ambient,
            basis: Mat::zero(ambient, 0, spec),
        }
    }

    pub fn full(ambient: usize, spec: FieldSpec) -> Subspace {
        Subspace::from_cols(&Mat::identity(ambient, spec))
    }

    /// Span of a single vector.
    pub fn line(v: &[u16], spec: FieldSpec) -> Subspace {
        let col = Mat::from_rows(&v.iter().map(|&x| vec![x]).collect::<Vec<_>>(), spec);
        Subspace::from_cols(&col)
    }

    #[inline]
    pub fn ambient(&self) -> usize {
        self.ambient
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.basis.spec()
    }

    /// Canonical basis, columns of an `ambient x dim` matrix.
    #[inline]
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(LinalgError::AmbientMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        Ok(())
    }

    pub fn contains_vec(&self, v: &[u16]) -> bool {
        assert_eq!(v.len(), self.ambient);
        let rhs = Mat::from_rows(&v.iter().map(|&x| vec![x]).collect::<Vec<_>>(), self.spec());
        self.basis.solve(&rhs).is_some()
    }

    /// Whether `inner` is contained in `self` (feasibility of a linear system).
    pub fn contains(&self, inner: &Subspace) -> Result<bool, LinalgError> {
        self.check_ambient(inner)?;
        if inner.dim() == 0 {
            return Ok(true);
        }
        Ok(self.basis.solve(&inner.basis).is_some())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        Ok(Subspace::from_cols(&self.basis.hcat(&other.basis)))
    }

    /// Intersection via the null space of `[A | -B]`: a null vector
    /// `(x, y)` has `A x = B y`, and those common values span the meet.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_ambient(other)?;
        let f = self.spec();
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.ambient, f));
        }
        let neg_b = other.basis.map(|x| f.neg(x));
        let stacked = self.basis.hcat(&neg_b);
        let null = stacked.null_space();
        let a_dim = self.dim();
        let rows: Vec<usize> = (0..a_dim).collect();
        let all: Vec<usize> = (0..null.cols()).collect();
        let x_part = null.submatrix(&rows, &all);
        let vectors = self.basis.mul(&x_part).unwrap();
        Ok(Subspace::from_cols(&vectors))
    }
}

/// Apply a transition matrix to coordinate columns (matrix product).
pub fn apply_transition(t: &Mat, coords: &Mat) -> Result<Mat, LinalgError> {
    t.mul(coords)
}


#[cfg(test)]
mod tests {
    use super::test_rng::{random_mat, random_subspace, Rng};
    use super::*;

    fn gf(p: u32) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn rref_identity_case() {
        let m = Mat::identity(2, gf(2));
        let (r, piv) = m.rref();
        assert_eq!(r, m);
        assert_eq!(piv, vec![0, 1]);
    }

    #[test]
    fn rref_dependent_rows_gf3() {
        // row2 = 2*row1 mod 3, so one pivot survives
        let m = Mat::from_rows(&[vec![1, 2, 0], vec![2, 1, 0]], gf(3));
        let (r, piv) = m.rref();
        assert_eq!(r, Mat::from_rows(&[vec![1, 2, 0]], gf(3)));
        assert_eq!(piv, vec![0]);
    }

    #[test]
    fn rref_zero_matrix() {
        let m = Mat::zero(3, 3, gf(2));
        let (r, piv) = m.rref();
        assert_eq!(r.rows(), 0);
        assert_eq!(r.cols(), 3);
        assert!(piv.is_empty());
    }

    #[test]
    fn rref_idempotent_and_pivot_identity() {
        let mut rng = Rng(11);
        for p in [2u32, 3, 5] {
            for _ in 0..60 {
                let m = random_mat(&mut rng, 4, 6, gf(p));
                let (r, piv) = m.rref();
                let (r2, piv2) = r.rref();
                assert_eq!(r, r2);
                assert_eq!(piv, piv2);
                let id = r.columns(&piv);
                assert_eq!(id, Mat::identity(piv.len(), gf(p)));
            }
        }
    }

    #[test]
    fn gf2_bitpacked_matches_generic() {
        let mut rng = Rng(7);
        for _ in 0..120 {
            let m = random_mat(&mut rng, 5, 9, gf(2));
            let fast = m.rref_gf2();
            let slow = m.rref_generic();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn subspace_contains_examples() {
        let f = gf(2);
        let x = Subspace::from_cols(&Mat::from_rows(&[vec![1, 0], vec![0, 1]], f));
        assert!(x.contains(&x).unwrap());
        assert!(x.contains(&Subspace::zero(2, f)).unwrap());
        let e1 = Subspace::line(&[1, 0], f);
        let diag = Subspace::line(&[1, 1], f);
        assert!(!e1.contains(&diag).unwrap());
    }

    #[test]
    fn subspace_sum_examples() {
        let f = gf(2);
        let e1 = Subspace::line(&[1, 0, 0], f);
        let e2 = Subspace::line(&[0, 1, 0], f);
        let s = e1.sum(&e2).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&e1).unwrap() && s.contains(&e2).unwrap());
        let x = random_subspace(&mut Rng(3), 4, 3, f);
        assert_eq!(x.sum(&Subspace::zero(4, f)).unwrap(), x);
    }

    #[test]
    fn subspace_intersect_examples() {
        let f = gf(2);
        let a = Subspace::from_cols(&Mat::from_rows(&[vec![1, 0], vec![0, 1], vec![0, 0]], f));
        let b = Subspace::from_cols(&Mat::from_rows(&[vec![0, 0], vec![1, 0], vec![0, 1]], f));
        let meet = a.intersect(&b).unwrap();
        assert_eq!(meet, Subspace::line(&[0, 1, 0], f));
        let x = random_subspace(&mut Rng(5), 3, 2, f);
        assert_eq!(x.intersect(&x).unwrap(), x);
    }

    /// Exhaustive membership oracle in GF(2)^4: the intersection computed via
    /// the null-space construction must span exactly the vectors lying in
    /// both spans.
    #[test]
    fn intersect_brute_force_gf2_4() {
        let f = gf(2);
        let mut rng = Rng(17);
        for _ in 0..80 {
            let a = random_subspace(&mut rng, 4, 3, f);
            let b = random_subspace(&mut rng, 4, 3, f);
            let meet = a.intersect(&b).unwrap();
            let mut common = Vec::new();
            for bits in 0..16u32 {
                let v: Vec<u16> = (0..4).map(|i| (bits >> i & 1) as u16).collect();
                if a.contains_vec(&v) && b.contains_vec(&v) {
                    common.push(v);
                }
            }
            let common_mat = Mat::from_rows(&common, f).transpose();
            let oracle = Subspace::from_cols(&common_mat);
            assert_eq!(meet, oracle);
        }
    }

    #[test]
    fn dim_formula_sum_intersection() {
        let mut rng = Rng(23);
        for p in [2u32, 3] {
            let f = gf(p);
            for _ in 0..60 {
                let a = random_subspace(&mut rng, 5, 4, f);
                let b = random_subspace(&mut rng, 5, 4, f);
                let s = a.sum(&b).unwrap();
                let i = a.intersect(&b).unwrap();
                assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
            }
        }
    }

    /// Two Subspace values are equal iff they span the same vectors
    /// (exhaustive over GF(2)^3).
    #[test]
    fn canonical_form_unique_gf2_3() {
        let f = gf(2);
        let mut seen: Vec<(Vec<bool>, Subspace)> = Vec::new();
        // enumerate all column sets of GF(2)^3 (up to 3 generators suffices)
        let vecs: Vec<Vec<u16>> = (0..8u32)
            .map(|b| (0..3).map(|i| (b >> i & 1) as u16).collect())
            .collect();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let m = Mat::from_rows(&[vecs[i].clone(), vecs[j].clone(), vecs[k].clone()], f)
                        .transpose();
                    let s = Subspace::from_cols(&m);
                    let membership: Vec<bool> = vecs.iter().map(|v| s.contains_vec(v)).collect();
                    if let Some((_, other)) = seen.iter().find(|(m2, _)| *m2 == membership) {
                        assert_eq!(&s, other);
                    } else {
                        assert!(seen.iter().all(|(_, o)| o != &s));
                        seen.push((membership, s));
                    }
                }
            }
        }
    }

    #[test]
    fn apply_transition_examples() {
        let f = gf(3);
        let c = Mat::from_rows(&[vec![1, 2], vec![0, 1]], f);
        let id = Mat::identity(2, f);
        assert_eq!(apply_transition(&id, &c).unwrap(), c);
        // composition == product
        let mut rng = Rng(31);
        let p = random_mat(&mut rng, 3, 2, f);
        let q = random_mat(&mut rng, 2, 2, f);
        let lhs = apply_transition(&p, &apply_transition(&q, &c).unwrap()).unwrap();
        let rhs = apply_transition(&p.mul(&q).unwrap(), &c).unwrap();
        assert_eq!(lhs, rhs);
        // embedding of a line into a plane
        let t = Mat::from_rows(&[vec![1], vec![0]], f);
        let coords = Mat::from_rows(&[vec![2]], f);
        let out = apply_transition(&t, &coords).unwrap();
        assert_eq!(out, Mat::from_rows(&[vec![2], vec![0]], f));
    }

    #[test]
    fn solve_infeasible_detected() {
        let f = gf(2);
        let a = Mat::from_rows(&[vec![1], vec![0]], f);
        let rhs = Mat::from_rows(&[vec![0], vec![1]], f);
        assert!(a.solve(&rhs).is_none());
    }

    /// Lemma-level identity used throughout the DP:
    /// dim (X1+X2) cap (Y1+Y2) = dim X1 cap Y1 + dim X2 cap Y2
    ///   - dim X1 cap X2 - dim Y1 cap Y2 + dim (X1+Y1) cap (X2+Y2).
    #[test]
    fn dim_join_identity_random() {
        let mut rng = Rng(41);
        for p in [2u32, 3] {
            let f = gf(p);
            for _ in 0..120 {
                let x1 = random_subspace(&mut rng, 4, 3, f);
                let x2 = random_subspace(&mut rng, 4, 3, f);
                let y1 = random_subspace(&mut rng, 4, 3, f);
                let y2 = random_subspace(&mut rng, 4, 3, f);
                let lhs = x1
                    .sum(&x2)
                    .unwrap()
                    .intersect(&y1.sum(&y2).unwrap())
                    .unwrap()
                    .dim() as i64;
                let rhs = x1.intersect(&y1).unwrap().dim() as i64
                    + x2.intersect(&y2).unwrap().dim() as i64
                    - x1.intersect(&x2).unwrap().dim() as i64
                    - y1.intersect(&y2).unwrap().dim() as i64
                    + x1.sum(&y1)
                        .unwrap()
                        .intersect(&x2.sum(&y2).unwrap())
                        .unwrap()
                        .dim() as i64;
                assert_eq!(lhs, rhs);
            }
        }
    }
}
