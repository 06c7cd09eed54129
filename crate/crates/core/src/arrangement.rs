//! Subspace arrangements: an RREF matrix plus an ordered partition of its
//! columns, one part per subspace. Holds the two preprocessing reductions
//! (row reduction, column reduction) and direct cut-dimension evaluation.

use crate::field::FieldSpec;
use crate::linalg::{Mat, Subspace};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    /// Preprocessing proved dim(V_i cap sum of the rest) > k for this part.
    RejectedAboveK {
        part: usize,
        dim: usize,
    },
    IndexOutOfRange {
        index: usize,
        n: usize,
    },
}

impl fmt::Display for ArrangementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrangementError::RejectedAboveK { part, dim } => {
                write!(f, "part {part} meets the rest in dimension {dim} > k")
            }
            ArrangementError::IndexOutOfRange { index, n } => {
                write!(f, "part index {index} out of range (n = {n})")
            }
        }
    }
}

impl std::error::Error for ArrangementError {}

/// An arrangement in solver form: `mat` is in reduced row echelon form with
/// no zero rows, `parts` are consecutive column ranges, and `pivots[i]` is
/// the column carrying row i's leading 1 (so `mat[pivots]` is an identity).
#[derive(Clone, PartialEq, Eq)]
pub struct Arrangement {
    mat: Mat,
    part_ranges: Vec<(usize, usize)>,
    pivots: Vec<usize>,
}

impl fmt::Debug for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Arrangement(n={}, r={}, m={}, p={})",
            self.n(),
            self.mat.rows(),
            self.mat.cols(),
            self.spec().modulus()
        )
    }
}

impl Arrangement {
    /// Row-reduce `mat` (RREF, zero rows removed) and wrap it with the given
    /// ordered partition. Column counts are unchanged by row reduction, so
    /// the part sizes carry over. This does not apply the column reduction;
    /// see [`preprocess`].
    pub fn new(mat: &Mat, part_sizes: &[usize]) -> Arrangement {
        assert_eq!(
            part_sizes.iter().sum::<usize>(),
            mat.cols(),
            "parts must cover all columns"
        );
        let (red, pivots) = mat.rref();
        let mut part_ranges = Vec::with_capacity(part_sizes.len());
        let mut at = 0;
        for &s in part_sizes {
            part_ranges.push((at, at + s));
            at += s;
        }
        Arrangement {
            mat: red,
            part_ranges,
            pivots,
        }
    }

    pub fn from_subspaces(spaces: &[Subspace], spec: FieldSpec) -> Arrangement {
        let ambient = spaces.first().map_or(0, Subspace::ambient);
        let mut mat = Mat::zero(ambient, 0, spec);
        let mut sizes = Vec::with_capacity(spaces.len());
        for s in spaces {
            assert_eq!(s.ambient(), ambient);
            mat = mat.hcat(s.basis());
            sizes.push(s.dim());
        }
        Arrangement::new(&mat, &sizes)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.part_ranges.len()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    #[inline]
    pub fn spec(&self) -> FieldSpec {
        self.mat.spec()
    }

    #[inline]
    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    #[inline]
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn part_cols(&self, i: usize) -> Vec<usize> {
        let (a, b) = self.part_ranges[i];
        (a..b).collect()
    }

    pub fn part_size(&self, i: usize) -> usize {
        let (a, b) = self.part_ranges[i];
        b - a
    }

    pub fn part_subspace(&self, i: usize) -> Subspace {
        Subspace::from_cols(&self.mat.columns(&self.part_cols(i)))
    }

    /// Direct span of the union of the given parts' columns.
    pub fn span_of_parts(&self, subset: &[usize]) -> Subspace {
        let mut cols = Vec::new();
        for &i in subset {
            cols.extend(self.part_cols(i));
        }
        Subspace::from_cols(&self.mat.columns(&cols))
    }

    fn complement(&self, subset: &[usize]) -> Vec<usize> {
        let mut inx = vec![false; self.n()];
        for &i in subset {
            inx[i] = true;
        }
        (0..self.n()).filter(|&i| !inx[i]).collect()
    }

    /// Cut dimension and an explicit basis of the two-sided intersection,
    /// computed from ranks of two off-diagonal blocks of the RREF matrix:
    /// the meet of `col(M[X])` and `col(M[Y])` has dimension
    /// rank M[B cap Y, X-B] + rank M[B cap X, Y-B], and masking the pivot
    /// rows of a column basis of each block yields basis vectors.
    pub fn cut_dim(&self, subset: &[usize]) -> Result<(usize, Mat), ArrangementError> {
        for &i in subset {
            if i >= self.n() {
                return Err(ArrangementError::IndexOutOfRange {
                    index: i,
                    n: self.n(),
                });
            }
        }
        let comp = self.complement(subset);
        let mut x_cols = Vec::new();
        for &i in subset {
            x_cols.extend(self.part_cols(i));
        }
        let mut y_cols = Vec::new();
        for &i in &comp {
            y_cols.extend(self.part_cols(i));
        }
        Ok(self.cut_dim_cols(&x_cols, &y_cols))
    }

    fn cut_dim_cols(&self, x_cols: &[usize], y_cols: &[usize]) -> (usize, Mat) {
        let in_x = |c: usize| x_cols.binary_search(&c).is_ok();
        // rows are indexed by pivot columns
        let rows_b_in_x: Vec<usize> = (0..self.rows()).filter(|&r| in_x(self.pivots[r])).collect();
        let rows_b_in_y: Vec<usize> = (0..self.rows())
            .filter(|&r| !in_x(self.pivots[r]))
            .collect();
        let x_nonpiv: Vec<usize> = x_cols
            .iter()
            .copied()
            .filter(|&c| !self.pivots.contains(&c))
            .collect();
        let y_nonpiv: Vec<usize> = y_cols
            .iter()
            .copied()
            .filter(|&c| !self.pivots.contains(&c))
            .collect();

        let p = self
            .mat
            .submatrix(&rows_b_in_y, &x_nonpiv)
            .col_basis_of(&(0..x_nonpiv.len()).collect::<Vec<_>>());
        let q = self
            .mat
            .submatrix(&rows_b_in_x, &y_nonpiv)
            .col_basis_of(&(0..y_nonpiv.len()).collect::<Vec<_>>());

        let mut basis = Mat::zero(self.rows(), 0, self.spec());
        for &j in &p {
            let col = x_nonpiv[j];
            let mut v = Mat::zero(self.rows(), 1, self.spec());
            for &r in &rows_b_in_y {
                v[(r, 0)] = self.mat[(r, col)];
            }
            basis = basis.hcat(&v);
        }
        for &j in &q {
            let col = y_nonpiv[j];
            let mut v = Mat::zero(self.rows(), 1, self.spec());
            for &r in &rows_b_in_x {
                v[(r, 0)] = self.mat[(r, col)];
            }
            basis = basis.hcat(&v);
        }
        (p.len() + q.len(), basis)
    }

    /// Boundary subspace of a part subset: span(X parts) meet span(rest).
    pub fn boundary(&self, subset: &[usize]) -> Subspace {
        let (_, basis) = self.cut_dim(subset).expect("subset in range");
        Subspace::from_cols(&basis)
    }

    /// Sub-arrangement on the first `i` parts (a column prefix). Rows whose
    /// pivot lies beyond the prefix are zero within it, so truncation plus
    /// zero-row removal keeps the RREF invariant.
    pub fn prefix(&self, i: usize) -> Arrangement {
        assert!(i <= self.n());
        let end = if i == 0 { 0 } else { self.part_ranges[i - 1].1 };
        let cols: Vec<usize> = (0..end).collect();
        let truncated = self.mat.columns(&cols);
        let sizes: Vec<usize> = (0..i).map(|j| self.part_size(j)).collect();
        Arrangement::new(&truncated, &sizes)
    }
}

/// Result of full preprocessing: the reduced arrangement over the parts that
/// stayed nonzero, plus bookkeeping to reattach the zero-dimensional parts.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub arr: Arrangement,
    /// Original (0-based) indices of the parts kept in `arr`, in order.
    pub kept: Vec<usize>,
    /// Original indices of parts whose reduced subspace is {0}.
    pub removed: Vec<usize>,
    pub orig_n: usize,
}

/// Row reduction, column reduction, row reduction again.
///
/// The column reduction replaces each part's columns by an explicit basis of
/// V_i meet (sum of the other parts), which preserves every cut value; it
/// fails with `RejectedAboveK` exactly when some such meet has dimension
/// greater than k.
pub fn preprocess(
    mat: &Mat,
    part_sizes: &[usize],
    k: usize,
) -> Result<Preprocessed, ArrangementError> {
    let a = Arrangement::new(mat, part_sizes);
    let n = a.n();
    let mut new_mat = Mat::zero(a.rows(), 0, a.spec());
    let mut new_sizes = Vec::with_capacity(n);
    for i in 0..n {
        let (dim, basis) = a.cut_dim(&[i])?;
        if dim > k {
            return Err(ArrangementError::RejectedAboveK { part: i, dim });
        }
        new_mat = new_mat.hcat(&basis);
        new_sizes.push(dim);
    }
    let kept: Vec<usize> = (0..n).filter(|&i| new_sizes[i] > 0).collect();
    let removed: Vec<usize> = (0..n).filter(|&i| new_sizes[i] == 0).collect();
    let kept_sizes: Vec<usize> = kept.iter().map(|&i| new_sizes[i]).collect();
    // dropping empty parts only discards zero-width ranges
    let arr = Arrangement::new(&new_mat, &kept_sizes);
    Ok(Preprocessed {
        arr,
        kept,
        removed,
        orig_n: n,
    })
}
