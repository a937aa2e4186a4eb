//! Descriptional (bit) size of scalars, vectors, matrices and affine maps.
//!
//! Polynomials, constraints and CPRs implement the trait in `lowering`.

use crate::linalg::{AffineMap, FieldVec};
use crate::scalar::{QuadRat, Rat, Scalar};

pub trait DescriptionalSize {
    fn descriptional_size(&self) -> u64;
}

impl DescriptionalSize for Rat {
    fn descriptional_size(&self) -> u64 {
        self.size()
    }
}

impl DescriptionalSize for QuadRat {
    fn descriptional_size(&self) -> u64 {
        self.size()
    }
}

/// `d + Σ size(v_i)`.
pub fn vector_size<S: Scalar>(v: &[S]) -> u64 {
    v.len() as u64 + v.iter().map(Scalar::size).sum::<u64>()
}

impl<S: Scalar> DescriptionalSize for FieldVec<S> {
    fn descriptional_size(&self) -> u64 {
        vector_size(self.as_slice())
    }
}

impl<S: Scalar> DescriptionalSize for [S] {
    fn descriptional_size(&self) -> u64 {
        vector_size(self)
    }
}

/// `rows·cols + Σ size(a_ij)` over the dense matrix, zeros included.
pub fn matrix_size<S: Scalar>(m: &AffineMap<S>) -> u64 {
    let zero = S::zero().size();
    let total = (m.rows() * m.cols()) as u64;
    let nonzero: u64 = (0..m.rows()).map(|r| m.row(r).len() as u64).sum();
    let nz_size: u64 = (0..m.rows()).flat_map(|r| m.row(r).iter()).map(|(_, x)| x.size()).sum();
    total + nz_size + (total - nonzero) * zero
}

impl<S: Scalar> DescriptionalSize for AffineMap<S> {
    /// `size(matrix) + size(offset) + 1`.
    fn descriptional_size(&self) -> u64 {
        matrix_size(self) + vector_size(self.offset()) + 1
    }
}
