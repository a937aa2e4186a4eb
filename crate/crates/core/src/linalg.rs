//! Vectors and affine maps over an exact field.
//!
//! Affine maps store their matrix as sparse rows; machines built by the
//! compiler are mostly copies and unit shifts, so this keeps evaluation and
//! composition cheap without changing the dense serialized form.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};
use crate::scalar::{Rat, Scalar};

/// A vector of field elements.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FieldVec<S> {
    entries: Vec<S>,
}

impl<S: Scalar> FieldVec<S> {
    pub fn new(entries: Vec<S>) -> Self {
        FieldVec { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        FieldVec {
            entries: vec![S::zero(); dim],
        }
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = S::one();
        v
    }

    pub fn parse(items: &[&str]) -> Result<Self> {
        items
            .iter()
            .map(|s| S::parse_scalar(s))
            .collect::<Result<Vec<_>>>()
            .map(FieldVec::new)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<S> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, S> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &[S]) -> Result<S> {
        dot(&self.entries, other)
    }

    pub fn is_rational(&self) -> bool {
        self.entries.iter().all(|x| x.to_rat().is_some())
    }
}

impl<S> Index<usize> for FieldVec<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.entries[i]
    }
}

impl<S: Scalar> From<Vec<S>> for FieldVec<S> {
    fn from(entries: Vec<S>) -> Self {
        FieldVec::new(entries)
    }
}

impl<S: Scalar> fmt::Display for FieldVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl<S: Scalar> fmt::Debug for FieldVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact inner product.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> Result<S> {
    if a.len() != b.len() {
        return Err(Error::dims("inner product", a.len(), b.len()));
    }
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = acc + x.clone() * y;
        }
    }
    Ok(acc)
}

/// Map a rational vector into another field.
pub fn lift_vec<S: Scalar>(v: &[Rat]) -> Vec<S> {
    v.iter().map(|x| S::from_rat(x.clone())).collect()
}

/// One row of a sparse matrix: `(column, coefficient)` pairs sorted by
/// column, with no zero coefficients.
pub type SparseRow<S> = Vec<(usize, S)>;

/// `x ↦ M·x + c`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineMap<S> {
    cols: usize,
    rows: Vec<SparseRow<S>>,
    offset: Vec<S>,
}

impl<S: Scalar> AffineMap<S> {
    /// Build from a dense matrix given as rows.
    pub fn new(matrix: Vec<Vec<S>>, offset: Vec<S>, cols: usize) -> Result<Self> {
        if matrix.len() != offset.len() {
            return Err(Error::dims("affine map offset", matrix.len(), offset.len()));
        }
        let mut rows = Vec::with_capacity(matrix.len());
        for row in matrix {
            if row.len() != cols {
                return Err(Error::dims("affine map row", cols, row.len()));
            }
            rows.push(row.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect());
        }
        Ok(AffineMap { cols, rows, offset })
    }

    /// Build from sparse rows; entries are sorted, merged and zero-pruned.
    pub fn from_sparse(cols: usize, rows: Vec<(SparseRow<S>, S)>) -> Result<Self> {
        let mut out_rows = Vec::with_capacity(rows.len());
        let mut offset = Vec::with_capacity(rows.len());
        for (mut row, c) in rows {
            row.sort_by_key(|(j, _)| *j);
            let mut merged: SparseRow<S> = Vec::with_capacity(row.len());
            for (j, x) in row {
                if j >= cols {
                    return Err(Error::dims("affine map column", cols, j + 1));
                }
                match merged.last_mut() {
                    Some((k, acc)) if *k == j => *acc = acc.clone() + x,
                    _ => merged.push((j, x)),
                }
            }
            merged.retain(|(_, x)| !x.is_zero());
            out_rows.push(merged);
            offset.push(c);
        }
        Ok(AffineMap {
            cols,
            rows: out_rows,
            offset,
        })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            cols: n,
            rows: (0..n).map(|i| vec![(i, S::one())]).collect(),
            offset: vec![S::zero(); n],
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        AffineMap {
            cols,
            rows: vec![Vec::new(); rows],
            offset: vec![S::zero(); rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[(usize, S)] {
        &self.rows[r]
    }

    pub fn offset(&self) -> &[S] {
        &self.offset
    }

    pub fn entry(&self, r: usize, c: usize) -> S {
        self.rows[r]
            .iter()
            .find(|(j, _)| *j == c)
            .map(|(_, x)| x.clone())
            .unwrap_or_else(S::zero)
    }

    pub fn dense_matrix(&self) -> Vec<Vec<S>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![S::zero(); self.cols];
                for (j, x) in row {
                    dense[*j] = x.clone();
                }
                dense
            })
            .collect()
    }

    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::dims("affine map input", self.cols, x.len()));
        }
        Ok(self.apply_unchecked(|j| &x[j]))
    }

    /// Apply to the concatenation of `segments` without materializing it.
    pub fn apply_segments(&self, segments: &[&[S]]) -> Result<Vec<S>> {
        let total: usize = segments.iter().map(|s| s.len()).sum();
        if total != self.cols {
            return Err(Error::dims("affine map input", self.cols, total));
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut acc = 0;
        for s in segments {
            starts.push(acc);
            acc += s.len();
        }
        Ok(self.apply_unchecked(|j| {
            let seg = starts.partition_point(|&s| s <= j) - 1;
            &segments[seg][j - starts[seg]]
        }))
    }

    fn apply_unchecked<'a>(&'a self, get: impl Fn(usize) -> &'a S) -> Vec<S>
    where
        S: 'a,
    {
        self.rows
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| {
                let mut acc = c.clone();
                for (j, a) in row {
                    let x = get(*j);
                    if !x.is_zero() {
                        acc = acc + a.clone() * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// `self ∘ inner`, i.e. `x ↦ self(inner(x))`.
    pub fn compose(&self, inner: &AffineMap<S>) -> Result<AffineMap<S>> {
        if inner.rows() != self.cols {
            return Err(Error::dims("affine composition", self.cols, inner.rows()));
        }
        let mut rows = Vec::with_capacity(self.rows());
        for (row, c) in self.rows.iter().zip(&self.offset) {
            let mut acc: SparseRow<S> = Vec::new();
            let mut off = c.clone();
            for (k, a) in row {
                off = off + a.clone() * &inner.offset[*k];
                for (j, b) in &inner.rows[*k] {
                    acc.push((*j, a.clone() * b));
                }
            }
            rows.push((acc, off));
        }
        AffineMap::from_sparse(inner.cols, rows)
    }

    /// Reorder or widen the input space: input column `j` moves to
    /// `placement[j]` in a space of `new_cols` columns.
    pub fn reindex_inputs(&self, placement: &[usize], new_cols: usize) -> Result<AffineMap<S>> {
        if placement.len() != self.cols {
            return Err(Error::dims("column placement", self.cols, placement.len()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| (row.iter().map(|(j, x)| (placement[*j], x.clone())).collect(), c.clone()))
            .collect();
        AffineMap::from_sparse(new_cols, rows)
    }

    /// Keep only the listed output rows, in order.
    pub fn select_rows(&self, rows: impl IntoIterator<Item = usize>) -> AffineMap<S> {
        let (rows, offset): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .map(|r| (self.rows[r].clone(), self.offset[r].clone()))
            .unzip();
        AffineMap {
            cols: self.cols,
            rows,
            offset,
        }
    }

    /// Same map with output row `r` replaced by the constant 0.
    pub fn with_zero_row(&self, r: usize) -> AffineMap<S> {
        let mut out = self.clone();
        out.rows[r].clear();
        out.offset[r] = S::zero();
        out
    }

    /// Stack the rows of `self` on top of the rows of `other`.
    pub fn stack(&self, other: &AffineMap<S>) -> Result<AffineMap<S>> {
        if self.cols != other.cols {
            return Err(Error::dims("affine stacking", self.cols, other.cols));
        }
        let mut out = self.clone();
        out.rows.extend(other.rows.iter().cloned());
        out.offset.extend(other.offset.iter().cloned());
        Ok(out)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AffineMap<T> {
        AffineMap {
            cols: self.cols,
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|(j, x)| (*j, f(x)))
                        .filter(|(_, x)| !x.is_zero())
                        .collect()
                })
                .collect(),
            offset: self.offset.iter().map(&f).collect(),
        }
    }

    pub fn scalars(&self) -> impl Iterator<Item = &S> {
        self.rows
            .iter()
            .flat_map(|r| r.iter().map(|(_, x)| x))
            .chain(self.offset.iter())
    }
}

impl<S: fmt::Debug> fmt::Debug for AffineMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AffineMap[{}x{}]", self.rows.len(), self.cols)?;
        for (r, c) in self.rows.iter().zip(&self.offset) {
            write!(f, " {r:?}+{c:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{QuadRat, Rat};
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn rv(items: &[i64]) -> Vec<Rat> {
        items.iter().map(|&x| Rat::from(x)).collect()
    }

    #[test]
    fn identity_map() {
        let id = AffineMap::<Rat>::identity(2);
        assert_eq!(id.apply(&rv(&[3, 4])).unwrap(), rv(&[3, 4]));
    }

    #[test]
    fn rotation_with_offset() {
        let f = AffineMap::new(vec![rv(&[0, 1]), rv(&[-1, 0])], rv(&[1, 0]), 2).unwrap();
        assert_eq!(f.apply(&rv(&[2, 5])).unwrap(), rv(&[6, -2]));
    }

    #[test]
    fn rescale_and_shift() {
        // x ↦ r⁻¹x − 1 with r = 2
        let f = AffineMap::new(vec![vec![r("1/2")]], rv(&[-1]), 1).unwrap();
        assert_eq!(f.apply(&rv(&[6])).unwrap(), rv(&[2]));
    }

    #[test]
    fn dimension_mismatch() {
        let f = AffineMap::<Rat>::identity(2);
        assert!(matches!(f.apply(&rv(&[1])), Err(Error::DimensionMismatch { .. })));
        assert!(AffineMap::new(vec![rv(&[1])], rv(&[0]), 2).is_err());
    }

    #[test]
    fn segments_match_concatenation() {
        let f = AffineMap::new(vec![rv(&[1, 2, 3, 4]), rv(&[0, 0, 0, 1])], rv(&[5, 0]), 4).unwrap();
        let a = rv(&[1, 1]);
        let b = rv(&[2, 3]);
        let whole = rv(&[1, 1, 2, 3]);
        assert_eq!(f.apply_segments(&[&a, &b]).unwrap(), f.apply(&whole).unwrap());
        assert_eq!(f.apply_segments(&[&[], &whole]).unwrap(), f.apply(&whole).unwrap());
    }

    #[test]
    fn quadratic_entries() {
        let f = AffineMap::new(vec![vec![QuadRat::sqrt2()]], vec![QuadRat::from(0)], 1).unwrap();
        assert_eq!(f.apply(&[QuadRat::sqrt2()]).unwrap(), vec![QuadRat::from(2)]);
    }

    fn small_map(rows: usize, cols: usize) -> impl Strategy<Value = AffineMap<Rat>> {
        (
            proptest::collection::vec(proptest::collection::vec(-3i64..4, cols), rows),
            proptest::collection::vec(-3i64..4, rows),
        )
            .prop_map(move |(m, c)| AffineMap::new(m.into_iter().map(|r| rv(&r)).collect(), rv(&c), cols).unwrap())
    }

    proptest! {
        #[test]
        fn composition_agrees_with_sequential_application(
            f in small_map(2, 3),
            g in small_map(3, 2),
            x in proptest::collection::vec(-5i64..6, 2),
        ) {
            let x = rv(&x);
            let fg = f.compose(&g).unwrap();
            prop_assert_eq!(fg.apply(&x).unwrap(), f.apply(&g.apply(&x).unwrap()).unwrap());
        }

        #[test]
        fn dense_roundtrip(f in small_map(3, 3)) {
            let back = AffineMap::new(f.dense_matrix(), f.offset().to_vec(), 3).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
